//! Footstep-level planar stepper.
//!
//! The robot is two foot poses. Every non-stand action lifts the swing foot
//! and places it relative to the stance foot, after which the roles swap.
//! A stand action moves neither foot and keeps the swing foot.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::se2::{mean_heading, normalize, orientation_error, position_error, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub fn other(self) -> Foot {
        match self {
            Foot::Left => Foot::Right,
            Foot::Right => Foot::Left,
        }
    }

    /// +1 for the left foot, -1 for the right.
    pub fn side(self) -> f64 {
        match self {
            Foot::Left => 1.0,
            Foot::Right => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Foot::Left => "L",
            Foot::Right => "R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct StepperConfig {
    /// m
    pub max_step_len: f64,
    /// rad
    pub max_step_yaw: f64,
    /// Nominal distance between the feet, m.
    pub stance_width: f64,
    /// Minimum signed lateral offset of the swing foot from the stance foot, m.
    pub lateral_margin: f64,
    /// s
    pub step_duration: f64,
    /// s
    pub settle_duration: f64,
    /// J/m^2
    pub k_lin: f64,
    /// J/rad^2
    pub k_ang: f64,
    /// J per step
    pub e_base: f64,
    /// Max distance of a foot from its nominal slot for a square stance, m.
    pub stance_pos_tol: f64,
    /// Max heading difference of a foot from the base for a square stance, rad.
    pub stance_yaw_tol: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            max_step_len: 0.4,
            max_step_yaw: 0.5,
            stance_width: 0.3,
            lateral_margin: 0.05,
            step_duration: 0.4,
            settle_duration: 0.5,
            k_lin: 1.0,
            k_ang: 0.5,
            e_base: 0.2,
            stance_pos_tol: 0.05,
            stance_yaw_tol: 0.1,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("max_step_len", self.max_step_len),
            ("max_step_yaw", self.max_step_yaw),
            ("stance_width", self.stance_width),
            ("lateral_margin", self.lateral_margin),
            ("step_duration", self.step_duration),
            ("settle_duration", self.settle_duration),
            ("k_lin", self.k_lin),
            ("k_ang", self.k_ang),
            ("e_base", self.e_base),
            ("stance_pos_tol", self.stance_pos_tol),
            ("stance_yaw_tol", self.stance_yaw_tol),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidConfig(format!("stepper.{name} must be finite and > 0, got {v}")));
            }
        }
        if self.lateral_margin >= self.stance_width {
            return Err(Error::InvalidConfig("stepper.lateral_margin must be < stepper.stance_width".into()));
        }
        Ok(())
    }
}

/// Swing-foot placement relative to the stance foot's mirrored nominal slot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FootstepAction {
    pub dx: f64,
    pub dy: f64,
    pub dyaw: f64,
    pub is_stand: bool,
}

impl FootstepAction {
    pub const STAND: FootstepAction = FootstepAction { dx: 0.0, dy: 0.0, dyaw: 0.0, is_stand: true };

    pub fn step(dx: f64, dy: f64, dyaw: f64) -> Self {
        FootstepAction { dx, dy, dyaw, is_stand: false }
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dyaw.is_finite()
    }

    /// Reflection across the body x-axis.
    pub fn mirrored(&self) -> Self {
        FootstepAction { dx: self.dx, dy: -self.dy, dyaw: -self.dyaw, is_stand: self.is_stand }
    }

    /// Vector form used by the smoothness penalty; a stand is the zero vector.
    pub fn as_array(&self) -> [f64; 3] {
        if self.is_stand {
            [0.0; 3]
        } else {
            [self.dx, self.dy, self.dyaw]
        }
    }

    /// Clamp to the reachable set of a `swing` foot.
    pub fn clamped(&self, swing: Foot, cfg: &StepperConfig) -> Self {
        if self.is_stand {
            return FootstepAction::STAND;
        }
        let side = swing.side();
        let dyaw = self.dyaw.clamp(-cfg.max_step_yaw, cfg.max_step_yaw);
        let (mut dx, mut dy) = (self.dx, self.dy);
        // The swing foot must stay at least `lateral_margin` on its own side.
        let min_side_dy = cfg.lateral_margin - cfg.stance_width;
        if side * dy < min_side_dy {
            dy = side * min_side_dy;
        }
        let n = libm::hypot(dx, dy);
        if n > cfg.max_step_len {
            let s = cfg.max_step_len / n;
            dx *= s;
            dy *= s;
        }
        FootstepAction { dx, dy, dyaw, is_stand: false }
    }
}

/// One placed footstep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    /// Clock when the foot landed, s.
    pub time: f64,
    pub foot: Foot,
    pub pose: Pose2,
    /// J
    pub energy: f64,
}

impl StepRecord {
    pub fn mirrored(&self) -> Self {
        StepRecord { time: self.time, foot: self.foot.other(), pose: self.pose.mirrored(), energy: self.energy }
    }
}

/// What a call to [`StepperState::step`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// The action after clamping.
    pub applied: FootstepAction,
    /// Energy of this step, J (0 for a stand).
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepperState {
    left: Pose2,
    right: Pose2,
    base: Pose2,
    swing: Foot,
    clock: f64,
    energy: f64,
    stand_streak: u32,
    step_log: Vec<StepRecord>,
}

/// Nominal slot of `foot` around a base pose.
pub fn foot_slot(base: &Pose2, foot: Foot, cfg: &StepperConfig) -> Pose2 {
    base.compose(&Pose2 { x: 0.0, y: foot.side() * 0.5 * cfg.stance_width, theta: 0.0 })
}

fn base_of(left: &Pose2, right: &Pose2) -> Pose2 {
    Pose2 {
        x: 0.5 * (left.x + right.x),
        y: 0.5 * (left.y + right.y),
        theta: mean_heading(left.theta, right.theta),
    }
}

impl StepperState {
    /// Square stance at `start` with the right foot swinging first.
    pub fn nominal(start: &Pose2, cfg: &StepperConfig) -> Self {
        Self::from_feet(foot_slot(start, Foot::Left, cfg), foot_slot(start, Foot::Right, cfg), Foot::Right)
    }

    pub fn from_feet(left: Pose2, right: Pose2, swing: Foot) -> Self {
        StepperState {
            left,
            right,
            base: base_of(&left, &right),
            swing,
            clock: 0.0,
            energy: 0.0,
            stand_streak: 0,
            step_log: Vec::new(),
        }
    }

    /// Nominal stance about `start`, each foot coordinate perturbed uniformly
    /// within `±perturb_scale` (m for positions, rad for headings).
    pub fn reset<R: Rng + ?Sized>(start: &Pose2, perturb_scale: f64, rng: &mut R, cfg: &StepperConfig) -> Self {
        Self::reset_with_swing(start, perturb_scale, rng, Foot::Right, cfg)
    }

    pub fn reset_with_swing<R: Rng + ?Sized>(
        start: &Pose2,
        perturb_scale: f64,
        rng: &mut R,
        first_swing: Foot,
        cfg: &StepperConfig,
    ) -> Self {
        let mut jitter = |p: Pose2| {
            if perturb_scale > 0.0 {
                let mut u = || rng.random_range(-perturb_scale..=perturb_scale);
                Pose2::new(p.x + u(), p.y + u(), p.theta + u())
            } else {
                p
            }
        };
        let left = jitter(foot_slot(start, Foot::Left, cfg));
        let right = jitter(foot_slot(start, Foot::Right, cfg));
        Self::from_feet(left, right, first_swing)
    }

    pub fn left(&self) -> Pose2 {
        self.left
    }

    pub fn right(&self) -> Pose2 {
        self.right
    }

    pub fn foot(&self, f: Foot) -> Pose2 {
        match f {
            Foot::Left => self.left,
            Foot::Right => self.right,
        }
    }

    /// Feet midpoint with the circular mean of the foot headings.
    pub fn base(&self) -> Pose2 {
        self.base
    }

    pub fn swing(&self) -> Foot {
        self.swing
    }

    pub fn swing_is_left(&self) -> bool {
        self.swing == Foot::Left
    }

    pub fn stance_foot(&self) -> Pose2 {
        self.foot(self.swing.other())
    }

    /// Base pose the robot would have with the swing foot at its nominal
    /// slot next to the stance foot.
    pub fn anchor(&self, cfg: &StepperConfig) -> Pose2 {
        foot_slot(&self.stance_foot(), self.swing, cfg)
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Consecutive stand actions since the last footstep.
    pub fn stand_streak(&self) -> u32 {
        self.stand_streak
    }

    pub fn step_log(&self) -> &[StepRecord] {
        &self.step_log
    }

    pub fn footsteps(&self) -> usize {
        self.step_log.len()
    }

    /// Apply one action.
    pub fn step(&mut self, action: &FootstepAction, cfg: &StepperConfig) -> Result<StepOutcome> {
        if !action.is_finite() {
            return Err(Error::NonFinite("footstep action"));
        }
        self.clock += cfg.step_duration;
        if action.is_stand {
            self.stand_streak += 1;
            return Ok(StepOutcome { applied: FootstepAction::STAND, energy: 0.0 });
        }
        let applied = action.clamped(self.swing, cfg);
        let side = self.swing.side();
        let stance = self.stance_foot();
        let target = stance.compose(&Pose2 {
            x: applied.dx,
            y: side * cfg.stance_width + applied.dy,
            theta: applied.dyaw,
        });
        let old = self.foot(self.swing);
        let (ex, ey) = (target.x - old.x, target.y - old.y);
        let turn = normalize(target.theta - old.theta);
        let energy = cfg.k_lin * (ex * ex + ey * ey) + cfg.k_ang * turn * turn + cfg.e_base;

        match self.swing {
            Foot::Left => self.left = target,
            Foot::Right => self.right = target,
        }
        self.base = base_of(&self.left, &self.right);
        self.energy += energy;
        self.step_log.push(StepRecord { time: self.clock, foot: self.swing, pose: target, energy });
        self.swing = self.swing.other();
        self.stand_streak = 0;
        Ok(StepOutcome { applied, energy })
    }

    /// Both feet within tolerance of their nominal slots around the base.
    pub fn feet_square(&self, cfg: &StepperConfig) -> bool {
        [Foot::Left, Foot::Right].into_iter().all(|f| {
            let slot = foot_slot(&self.base, f, cfg);
            let p = self.foot(f);
            position_error(&p, &slot) <= cfg.stance_pos_tol
                && orientation_error(p.theta, slot.theta) <= cfg.stance_yaw_tol
        })
    }

    /// Settled: two stand actions in a row, square feet, and the base inside
    /// the goal tolerances.
    pub fn is_settled(&self, goal: &Pose2, pos_tol: f64, ang_tol: f64, cfg: &StepperConfig) -> bool {
        self.stand_streak >= 2
            && self.feet_square(cfg)
            && position_error(&self.base, goal) < pos_tol
            && orientation_error(self.base.theta, goal.theta) < ang_tol
    }

    /// Reflection across the world x-axis; the feet swap roles.
    pub fn mirrored(&self) -> Self {
        StepperState {
            left: self.right.mirrored(),
            right: self.left.mirrored(),
            base: self.base.mirrored(),
            swing: self.swing.other(),
            clock: self.clock,
            energy: self.energy,
            stand_streak: self.stand_streak,
            step_log: self.step_log.iter().map(StepRecord::mirrored).collect(),
        }
    }
}
