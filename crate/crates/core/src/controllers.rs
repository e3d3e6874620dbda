//! Baseline controllers and the learned-policy adapters.
//!
//! Every controller maps `(state, goal)` to one [`FootstepAction`]. The
//! phase-structured baselines differ only in which intermediate base pose
//! they walk the feet toward and in the order of their phases:
//!
//! | controller | phases                                        |
//! |------------|-----------------------------------------------|
//! | FSM        | face target, walk (trapezoidal), turn to goal |
//! | Agility-3  | face target, walk (full steps), turn to goal  |
//! | Agility-2  | turn to goal heading, crab-walk to goal       |

use crate::error::{Error, Result};
use crate::policy::{goto_action, observe, wants_stand, Policy, PolicyMode, PolicyParams};
use crate::se2::{normalize, orientation_error, position_error, Pose2};
use crate::sim::{foot_slot, FootstepAction, StepperConfig, StepperState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ControllerId {
    Fsm,
    Agility2,
    Agility3,
    Hier,
    Goto,
}

impl ControllerId {
    pub const ALL: [ControllerId; 5] =
        [ControllerId::Fsm, ControllerId::Agility2, ControllerId::Agility3, ControllerId::Hier, ControllerId::Goto];

    /// Normalization baseline for reports.
    pub const BASELINE: ControllerId = ControllerId::Agility2;

    pub fn name(self) -> &'static str {
        match self {
            ControllerId::Fsm => "fsm",
            ControllerId::Agility2 => "agility2",
            ControllerId::Agility3 => "agility3",
            ControllerId::Hier => "hier",
            ControllerId::Goto => "goto",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ControllerId::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Learned controllers need a policy of this mode.
    pub fn policy_mode(self) -> Option<PolicyMode> {
        match self {
            ControllerId::Hier => Some(PolicyMode::Hier),
            ControllerId::Goto => Some(PolicyMode::Goto),
            _ => None,
        }
    }
}

/// Tuning shared by the phase-structured baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    /// Success position tolerance, m.
    pub pos_tol: f64,
    /// Success heading tolerance, rad.
    pub ang_tol: f64,
    /// Heading error that ends a turn-in-place phase, rad.
    pub align_tol: f64,
    /// Steps spent ramping step length up (and down) in the FSM walk.
    pub ramp_steps: u32,
    /// A foot this close to its slot (m and rad) is not moved again.
    pub slot_tol: f64,
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning { pos_tol: 0.05, ang_tol: 0.1, align_tol: 0.05, ramp_steps: 3, slot_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PhaseId {
    OrientBearing,
    OrientFinal,
    Translate,
    Settle,
}

/// Per-trial controller memory. Phases only ever move forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerPhase {
    pub id: PhaseId,
    /// Base position the current turn-in-place pivots about.
    pub pivot: Option<[f64; 2]>,
    /// Heading held while walking toward the target.
    pub bearing: Option<f64>,
    /// Footsteps taken in the walk phase.
    pub walk_steps: u32,
}

impl ControllerPhase {
    fn at(id: PhaseId) -> Self {
        ControllerPhase { id, pivot: None, bearing: None, walk_steps: 0 }
    }

    /// Initial phase of a baseline.
    pub fn initial(controller: ControllerId) -> Self {
        match controller {
            ControllerId::Agility2 => Self::at(PhaseId::OrientFinal),
            _ => Self::at(PhaseId::OrientBearing),
        }
    }

    fn advance(&mut self, id: PhaseId) {
        *self = Self::at(id);
    }

    /// Position of a phase in `controller`'s own chain.
    pub fn rank(controller: ControllerId, id: PhaseId) -> u8 {
        match (controller, id) {
            (ControllerId::Agility2, PhaseId::OrientFinal) => 0,
            (ControllerId::Agility2, PhaseId::Translate) => 1,
            (ControllerId::Agility2, _) => 2,
            (_, PhaseId::OrientBearing) => 0,
            (_, PhaseId::Translate) => 1,
            (_, PhaseId::OrientFinal) => 2,
            (_, PhaseId::Settle) => 3,
        }
    }
}

/// Body-frame base velocity command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCommand {
    /// m/s
    pub vx: f64,
    /// m/s
    pub vy: f64,
    /// rad/s
    pub omega: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand = VelocityCommand { vx: 0.0, vy: 0.0, omega: 0.0 };

    /// Limit to what one step of the gait can realize.
    pub fn clamped(&self, cfg: &StepperConfig) -> Self {
        let v_max = cfg.max_step_len / cfg.step_duration;
        let w_max = cfg.max_step_yaw / cfg.step_duration;
        let n = libm::hypot(self.vx, self.vy);
        let s = if n > v_max { v_max / n } else { 1.0 };
        VelocityCommand { vx: self.vx * s, vy: self.vy * s, omega: self.omega.clamp(-w_max, w_max) }
    }
}

/// One step of a fixed gait tracking `cmd`; a zero command stands.
pub fn gait_generator(cmd: &VelocityCommand, cfg: &StepperConfig) -> FootstepAction {
    if cmd.vx == 0.0 && cmd.vy == 0.0 && cmd.omega == 0.0 {
        return FootstepAction::STAND;
    }
    let t = cfg.step_duration;
    FootstepAction::step(cmd.vx * t, cmd.vy * t, cmd.omega * t)
}

/// Move the swing foot toward its slot around `target`, turning by at most
/// one yaw increment and translating at most `max_len`. Stands once both
/// feet are in place; a swing foot already in place while the stance foot is
/// not steps in place so the other foot can move next.
pub fn place_toward(state: &StepperState, target: &Pose2, max_len: f64, cfg: &StepperConfig, tune: &Tuning) -> FootstepAction {
    let swing = state.swing();
    let current = state.foot(swing);
    let stance = state.stance_foot();
    let at = |p: &Pose2, slot: &Pose2| {
        position_error(p, slot) <= tune.slot_tol && orientation_error(p.theta, slot.theta) <= tune.slot_tol
    };
    if at(&current, &foot_slot(target, swing, cfg)) {
        if at(&stance, &foot_slot(target, swing.other(), cfg)) {
            return FootstepAction::STAND;
        }
        let rel = foot_slot(&state.anchor(cfg), swing, cfg).between(&current);
        return FootstepAction::step(rel.x, rel.y, rel.theta);
    }
    let turn = normalize(target.theta - stance.theta).clamp(-cfg.max_step_yaw, cfg.max_step_yaw);
    let slot = foot_slot(&Pose2::new(target.x, target.y, stance.theta + turn), swing, cfg);
    let rel = stance.between(&slot);
    let mut a = FootstepAction::step(rel.x, rel.y - swing.side() * cfg.stance_width, rel.theta).clamped(swing, cfg);
    let n = libm::hypot(a.dx, a.dy);
    if n > max_len {
        let s = max_len / n;
        a.dx *= s;
        a.dy *= s;
    }
    a
}

fn feet_at(state: &StepperState, target: &Pose2, cfg: &StepperConfig, tune: &Tuning) -> bool {
    [crate::sim::Foot::Left, crate::sim::Foot::Right].into_iter().all(|f| {
        let p = state.foot(f);
        let slot = foot_slot(target, f, cfg);
        position_error(&p, &slot) <= tune.slot_tol && orientation_error(p.theta, slot.theta) <= tune.slot_tol
    })
}

fn goal_reached(state: &StepperState, goal: &Pose2, cfg: &StepperConfig, tune: &Tuning) -> bool {
    let base = state.base();
    state.feet_square(cfg)
        && position_error(&base, goal) < tune.pos_tol
        && orientation_error(base.theta, goal.theta) < tune.ang_tol
}

/// Step-length cap for the FSM's trapezoidal walk: ramp up over the first
/// `ramp_steps` steps, plateau at the max, and ramp down as the remaining
/// distance shrinks (`v^2 <= 2 a d` with a per-step increment `a`).
pub fn trapezoid_step_len(walk_steps: u32, remaining: f64, cfg: &StepperConfig, tune: &Tuning) -> f64 {
    let inc = cfg.max_step_len / (tune.ramp_steps as f64 + 1.0);
    let up = inc * (walk_steps as f64 + 1.0);
    let down = libm::sqrt(2.0 * inc * remaining).max(inc);
    cfg.max_step_len.min(up).min(down)
}

#[derive(Clone, Copy)]
enum WalkProfile {
    Full,
    Trapezoid,
}

/// Shared face-target / walk / turn-to-goal logic of FSM and Agility-3.
fn orient_walk_orient(
    state: &StepperState,
    goal: &Pose2,
    mut phase: ControllerPhase,
    profile: WalkProfile,
    cfg: &StepperConfig,
    tune: &Tuning,
) -> (FootstepAction, ControllerPhase) {
    if phase.id != PhaseId::Settle && goal_reached(state, goal, cfg, tune) {
        phase.advance(PhaseId::Settle);
    }
    let base = state.base();
    loop {
        match phase.id {
            PhaseId::OrientBearing => {
                if position_error(&base, goal) < tune.pos_tol {
                    phase.advance(PhaseId::OrientFinal);
                    continue;
                }
                let pivot = *phase.pivot.get_or_insert([base.x, base.y]);
                let bearing =
                    *phase.bearing.get_or_insert_with(|| libm::atan2(goal.y - base.y, goal.x - base.x));
                if orientation_error(base.theta, bearing) < tune.align_tol {
                    phase.advance(PhaseId::Translate);
                    phase.bearing = Some(bearing);
                    continue;
                }
                let target = Pose2::new(pivot[0], pivot[1], bearing);
                return (place_toward(state, &target, cfg.max_step_len, cfg, tune), phase);
            }
            PhaseId::Translate => {
                let bearing = phase.bearing.unwrap_or(base.theta);
                let target = Pose2::new(goal.x, goal.y, bearing);
                if feet_at(state, &target, cfg, tune) {
                    phase.advance(PhaseId::OrientFinal);
                    continue;
                }
                let max_len = match profile {
                    WalkProfile::Full => cfg.max_step_len,
                    WalkProfile::Trapezoid => {
                        let swing = state.swing();
                        let remaining = position_error(&state.foot(swing), &foot_slot(&target, swing, cfg));
                        trapezoid_step_len(phase.walk_steps, remaining, cfg, tune)
                    }
                };
                let a = place_toward(state, &target, max_len, cfg, tune);
                if !a.is_stand {
                    phase.walk_steps += 1;
                }
                return (a, phase);
            }
            PhaseId::OrientFinal => {
                if feet_at(state, goal, cfg, tune) {
                    phase.advance(PhaseId::Settle);
                    continue;
                }
                return (place_toward(state, goal, cfg.max_step_len, cfg, tune), phase);
            }
            PhaseId::Settle => return (FootstepAction::STAND, phase),
        }
    }
}

/// Face the target, walk to it with a trapezoidal step-length profile, then
/// turn to the goal heading.
pub fn fsm_controller(
    state: &StepperState,
    goal: &Pose2,
    phase: ControllerPhase,
    cfg: &StepperConfig,
    tune: &Tuning,
) -> (FootstepAction, ControllerPhase) {
    orient_walk_orient(state, goal, phase, WalkProfile::Trapezoid, cfg, tune)
}

/// Face the target, walk to it with full-length steps, then turn to the goal
/// heading.
pub fn agility3_controller(
    state: &StepperState,
    goal: &Pose2,
    phase: ControllerPhase,
    cfg: &StepperConfig,
    tune: &Tuning,
) -> (FootstepAction, ControllerPhase) {
    orient_walk_orient(state, goal, phase, WalkProfile::Full, cfg, tune)
}

/// Turn in place to the goal heading, then side/back/forward-step to the goal
/// position while holding that heading.
pub fn agility2_controller(
    state: &StepperState,
    goal: &Pose2,
    mut phase: ControllerPhase,
    cfg: &StepperConfig,
    tune: &Tuning,
) -> (FootstepAction, ControllerPhase) {
    if phase.id != PhaseId::Settle && goal_reached(state, goal, cfg, tune) {
        phase.advance(PhaseId::Settle);
    }
    let base = state.base();
    loop {
        match phase.id {
            PhaseId::OrientFinal => {
                let pivot = *phase.pivot.get_or_insert([base.x, base.y]);
                if orientation_error(base.theta, goal.theta) < tune.align_tol {
                    phase.advance(PhaseId::Translate);
                    continue;
                }
                let target = Pose2::new(pivot[0], pivot[1], goal.theta);
                return (place_toward(state, &target, cfg.max_step_len, cfg, tune), phase);
            }
            PhaseId::Translate => {
                if feet_at(state, goal, cfg, tune) {
                    phase.advance(PhaseId::Settle);
                    continue;
                }
                let a = place_toward(state, goal, cfg.max_step_len, cfg, tune);
                if !a.is_stand {
                    phase.walk_steps += 1;
                }
                return (a, phase);
            }
            // Not part of this controller's chain.
            PhaseId::OrientBearing => phase.advance(PhaseId::OrientFinal),
            PhaseId::Settle => return (FootstepAction::STAND, phase),
        }
    }
}

/// Learned high-level velocity policy tracked by [`gait_generator`].
pub fn hierarchical_controller(
    params: &PolicyParams,
    state: &StepperState,
    goal: &Pose2,
    steps_elapsed: usize,
    cfg: &StepperConfig,
) -> Result<FootstepAction> {
    params.check()?;
    let out = params.forward(&observe(state, goal, steps_elapsed, cfg));
    let cmd = if wants_stand(&out) {
        VelocityCommand::ZERO
    } else {
        let s = PolicyMode::Hier.action_scale(cfg);
        VelocityCommand { vx: out[0] * s[0], vy: out[1] * s[1], omega: out[2] * s[2] }.clamped(cfg)
    };
    Ok(gait_generator(&cmd, cfg))
}

/// End-to-end learned footstep policy.
pub fn goto_controller(
    params: &PolicyParams,
    state: &StepperState,
    goal: &Pose2,
    steps_elapsed: usize,
    cfg: &StepperConfig,
) -> Result<FootstepAction> {
    goto_action(params, &observe(state, goal, steps_elapsed, cfg), cfg)
}

/// A controller instance with its per-trial memory.
#[derive(Debug, Clone)]
pub enum Controller<'a> {
    Fsm(ControllerPhase),
    Agility2(ControllerPhase),
    Agility3(ControllerPhase),
    Hier(&'a PolicyParams),
    Goto(&'a PolicyParams),
}

impl<'a> Controller<'a> {
    /// Fresh controller; learned ones borrow a policy of the matching mode.
    pub fn new(id: ControllerId, policy: Option<&'a Policy>) -> Result<Self> {
        match id {
            ControllerId::Fsm => Ok(Controller::Fsm(ControllerPhase::initial(id))),
            ControllerId::Agility2 => Ok(Controller::Agility2(ControllerPhase::initial(id))),
            ControllerId::Agility3 => Ok(Controller::Agility3(ControllerPhase::initial(id))),
            ControllerId::Hier | ControllerId::Goto => {
                let p = policy.ok_or(Error::MissingPolicy(id.name()))?;
                let want = id.policy_mode().expect("learned controller");
                if p.mode != want {
                    return Err(Error::PolicyMode { expected: id.name(), found: p.mode.name() });
                }
                p.params.check()?;
                Ok(if id == ControllerId::Hier { Controller::Hier(&p.params) } else { Controller::Goto(&p.params) })
            }
        }
    }

    pub fn id(&self) -> ControllerId {
        match self {
            Controller::Fsm(_) => ControllerId::Fsm,
            Controller::Agility2(_) => ControllerId::Agility2,
            Controller::Agility3(_) => ControllerId::Agility3,
            Controller::Hier(_) => ControllerId::Hier,
            Controller::Goto(_) => ControllerId::Goto,
        }
    }

    /// Current phase of a baseline; `None` for learned controllers.
    pub fn phase(&self) -> Option<ControllerPhase> {
        match self {
            Controller::Fsm(p) | Controller::Agility2(p) | Controller::Agility3(p) => Some(*p),
            _ => None,
        }
    }

    pub fn act(
        &mut self,
        state: &StepperState,
        goal: &Pose2,
        steps_elapsed: usize,
        cfg: &StepperConfig,
        tune: &Tuning,
    ) -> Result<FootstepAction> {
        let (action, next) = match self {
            Controller::Fsm(p) => fsm_controller(state, goal, *p, cfg, tune),
            Controller::Agility2(p) => agility2_controller(state, goal, *p, cfg, tune),
            Controller::Agility3(p) => agility3_controller(state, goal, *p, cfg, tune),
            Controller::Hier(params) => return hierarchical_controller(params, state, goal, steps_elapsed, cfg),
            Controller::Goto(params) => return goto_controller(params, state, goal, steps_elapsed, cfg),
        };
        match self {
            Controller::Fsm(p) | Controller::Agility2(p) | Controller::Agility3(p) => *p = next,
            _ => {}
        }
        Ok(action)
    }
}
