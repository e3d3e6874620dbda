//! Goal distribution, rollouts and cross-entropy-method policy search.
//!
//! Randomness is drawn from ChaCha streams keyed by `(master seed, purpose,
//! iteration, index)`, so candidate sampling and evaluation can run in any
//! order, or in parallel, and still produce identical parameters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bench::mix_seed;
use crate::controllers::{goto_controller, hierarchical_controller};
use crate::error::{Error, Result};
use crate::policy::{Policy, PolicyMode, PolicyParams, PARAM_COUNT};
use crate::reward::{total_reward, RewardConfig};
use crate::se2::{constellation_distance, Constellation, Pose2};
use crate::sim::{Foot, FootstepAction, StepperConfig, StepperState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TaskCategory {
    Stand,
    Straight,
    Lateral,
    Turn,
    Combined,
}

impl TaskCategory {
    pub const ALL: [TaskCategory; 5] =
        [TaskCategory::Stand, TaskCategory::Straight, TaskCategory::Lateral, TaskCategory::Turn, TaskCategory::Combined];

    /// Sampling probabilities, aligned with [`TaskCategory::ALL`].
    pub const PROBS: [f64; 5] = [0.1, 0.2, 0.2, 0.2, 0.3];
}

/// Goal deltas are drawn from `[-max_dx, max_dx] x [-max_dy, max_dy] x [-pi, pi]`.
pub const MAX_DX: f64 = 2.0;
pub const MAX_DY: f64 = 1.5;
pub const MAX_DTHETA: f64 = PI;

/// Gap between goal resamples, in steps (4 to 8 s at 0.4 s per step).
pub const RESAMPLE_MIN_GAP: usize = 10;
pub const RESAMPLE_MAX_GAP: usize = 20;

/// One goal of a training episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub start: Pose2,
    pub goal: Pose2,
    pub category: TaskCategory,
    /// Step indices at which a fresh goal is issued.
    pub resample_at: Vec<usize>,
    pub first_swing: Foot,
    /// Seed of the initial foot perturbation.
    pub perturb_seed: u64,
}

impl TaskSpec {
    /// Goal relative to the start pose.
    pub fn delta(&self) -> Pose2 {
        self.start.between(&self.goal)
    }
}

pub fn sample_category<R: Rng + ?Sized>(rng: &mut R) -> TaskCategory {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (c, p) in TaskCategory::ALL.into_iter().zip(TaskCategory::PROBS) {
        acc += p;
        if u < acc {
            return c;
        }
    }
    TaskCategory::Combined
}

/// Goal delta for a category: zero outside the category's free components.
pub fn sample_delta<R: Rng + ?Sized>(rng: &mut R, category: TaskCategory) -> Pose2 {
    let mut u = |m: f64| rng.random_range(-m..=m);
    match category {
        TaskCategory::Stand => Pose2::IDENTITY,
        TaskCategory::Straight => Pose2::new(u(MAX_DX), 0.0, 0.0),
        TaskCategory::Lateral => Pose2::new(0.0, u(MAX_DY), 0.0),
        TaskCategory::Turn => Pose2::new(0.0, 0.0, u(MAX_DTHETA)),
        TaskCategory::Combined => {
            let (x, y, t) = (u(MAX_DX), u(MAX_DY), u(MAX_DTHETA));
            Pose2::new(x, y, t)
        }
    }
}

/// Resample indices strictly inside `(0, horizon)`, gaps uniform in
/// `[RESAMPLE_MIN_GAP, RESAMPLE_MAX_GAP]`.
pub fn sample_schedule<R: Rng + ?Sized>(rng: &mut R, horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = 0;
    loop {
        t += rng.random_range(RESAMPLE_MIN_GAP..=RESAMPLE_MAX_GAP);
        if t >= horizon {
            return out;
        }
        out.push(t);
    }
}

/// Draw a task: random start pose, category-conditioned goal delta,
/// resample schedule over `horizon` steps.
pub fn sample_task<R: Rng + ?Sized>(rng: &mut R, horizon: usize) -> TaskSpec {
    let category = sample_category(rng);
    let delta = sample_delta(rng, category);
    let start = Pose2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-PI..=PI));
    let resample_at = sample_schedule(rng, horizon);
    let first_swing = if rng.random::<bool>() { Foot::Left } else { Foot::Right };
    TaskSpec { start, goal: start.compose(&delta), category, resample_at, first_swing, perturb_seed: rng.random() }
}

/// Reflect a task across the world x-axis.
pub fn mirror_task(task: &TaskSpec) -> TaskSpec {
    TaskSpec {
        start: task.start.mirrored(),
        goal: task.goal.mirrored(),
        first_swing: task.first_swing.other(),
        ..task.clone()
    }
}

/// Everything a rollout needs besides the policy and tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutConfig {
    pub stepper: StepperConfig,
    pub reward: RewardConfig,
    pub constellation: Constellation,
    /// Initial foot perturbation, m and rad.
    pub perturb_scale: f64,
    pub horizon: usize,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig {
            stepper: StepperConfig::default(),
            reward: RewardConfig::default(),
            constellation: Constellation::circle(1.0, 8).expect("valid circle"),
            perturb_scale: 0.02,
            horizon: 60,
        }
    }
}

/// Action of a learned policy in either mode.
pub fn policy_action(
    params: &PolicyParams,
    mode: PolicyMode,
    state: &StepperState,
    goal: &Pose2,
    steps_elapsed: usize,
    cfg: &StepperConfig,
) -> Result<FootstepAction> {
    match mode {
        PolicyMode::Goto => goto_controller(params, state, goal, steps_elapsed, cfg),
        PolicyMode::Hier => hierarchical_controller(params, state, goal, steps_elapsed, cfg),
    }
}

/// A finished rollout.
#[derive(Debug, Clone)]
pub struct Rollout {
    /// Undiscounted sum of per-step rewards.
    pub ret: f64,
    pub rewards: Vec<f64>,
    /// Goal in force at each step.
    pub goals: Vec<Pose2>,
    pub state: StepperState,
}

/// Drive an arbitrary actor through an episode. The actor sees the state,
/// the goal in force, the episode step and whether the goal was just issued.
/// Returns the return and the final state; `on_step` sees each reward.
pub fn run_episode<A, F>(tasks: &[TaskSpec], cfg: &RolloutConfig, mut act: A, mut on_step: F) -> Result<(f64, StepperState)>
where
    A: FnMut(&StepperState, &Pose2, usize, bool) -> Result<FootstepAction>,
    F: FnMut(f64, &Pose2),
{
    let first = tasks.first().ok_or_else(|| Error::InvalidConfig("rollout needs at least one task".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(first.perturb_seed);
    let mut state =
        StepperState::reset_with_swing(&first.start, cfg.perturb_scale, &mut rng, first.first_swing, &cfg.stepper);
    let mut goal = first.goal;
    let mut next_task = 1;
    let mut prev = [0.0; 3];
    let mut ret = 0.0;
    for t in 0..cfg.horizon {
        if first.resample_at.contains(&t) {
            if let Some(task) = tasks.get(next_task) {
                goal = state.base().compose(&task.delta());
                next_task += 1;
            }
        }
        let action = act(&state, &goal, t, t == 0 || first.resample_at.contains(&t))?;
        let out = state.step(&action, &cfg.stepper)?;
        let applied = out.applied.as_array();
        let d = constellation_distance(&state.base(), &goal, &cfg.constellation);
        let r = total_reward(&d, &prev, &applied, out.energy, &cfg.reward)?;
        prev = applied;
        ret += r;
        on_step(r, &goal);
    }
    Ok((ret, state))
}

fn policy_episode(
    params: &PolicyParams,
    mode: PolicyMode,
    tasks: &[TaskSpec],
    cfg: &RolloutConfig,
    on_step: impl FnMut(f64, &Pose2),
) -> Result<(f64, StepperState)> {
    params.check()?;
    run_episode(tasks, cfg, |s, g, t, _| policy_action(params, mode, s, g, t, &cfg.stepper), on_step)
}

/// Roll a policy out for `cfg.horizon` steps. `tasks[0]` sets the start,
/// first goal and resample schedule; later tasks supply the deltas of the
/// resampled goals, applied from the robot's base at resample time.
pub fn rollout(params: &PolicyParams, mode: PolicyMode, tasks: &[TaskSpec], cfg: &RolloutConfig) -> Result<Rollout> {
    let mut rewards = Vec::with_capacity(cfg.horizon);
    let mut goals = Vec::with_capacity(cfg.horizon);
    let (ret, state) = policy_episode(params, mode, tasks, cfg, |r, g| {
        rewards.push(r);
        goals.push(*g);
    })?;
    Ok(Rollout { ret, rewards, goals, state })
}

/// Return only; no per-step bookkeeping.
pub fn rollout_return(params: &PolicyParams, mode: PolicyMode, tasks: &[TaskSpec], cfg: &RolloutConfig) -> Result<f64> {
    policy_episode(params, mode, tasks, cfg, |_, _| {}).map(|(r, _)| r)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CemConfig {
    pub population: usize,
    pub elites: usize,
    pub iterations: usize,
    pub init_std: f64,
    pub std_floor: f64,
    /// Episodes each candidate is scored on (shared within an iteration).
    pub tasks_per_candidate: usize,
    /// Steps per episode.
    pub horizon: usize,
    /// Probability an episode is reflected across the x-axis.
    pub mirror_prob: f64,
    pub seed: u64,
}

impl Default for CemConfig {
    fn default() -> Self {
        CemConfig {
            population: 64,
            elites: 8,
            iterations: 300,
            init_std: 0.5,
            std_floor: 0.02,
            tasks_per_candidate: 8,
            horizon: 60,
            mirror_prob: 0.5,
            seed: 0,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 || self.elites == 0 || self.iterations == 0 {
            return Err(Error::InvalidConfig("cem counts must be positive".into()));
        }
        if self.tasks_per_candidate == 0 || self.horizon == 0 {
            return Err(Error::InvalidConfig("cem.tasks_per_candidate and cem.horizon must be positive".into()));
        }
        if self.elites >= self.population {
            return Err(Error::InvalidConfig(format!(
                "cem.elites ({}) must be < cem.population ({})",
                self.elites, self.population
            )));
        }
        if !(self.init_std > 0.0) || !(self.std_floor > 0.0) || !self.init_std.is_finite() {
            return Err(Error::InvalidConfig("cem.init_std and cem.std_floor must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.mirror_prob) {
            return Err(Error::InvalidConfig("cem.mirror_prob must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CemLogRow {
    pub iteration: usize,
    pub mean_return: f64,
    pub elite_mean: f64,
    pub best_return: f64,
    /// Mean of the per-parameter standard deviations after the update.
    pub param_std: f64,
}

const STREAM_CANDIDATE: u64 = 1;
const STREAM_TASKS: u64 = 2;

/// Candidate `index` of `iteration`: `mean + std * N(0, I)` from its own stream.
pub fn sample_candidate(mean: &[f64], std: &[f64], seed: u64, iteration: usize, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, STREAM_CANDIDATE, iteration as u64, index as u64]));
    mean.iter()
        .zip(std)
        .map(|(m, s)| {
            let z: f64 = rng.sample(StandardNormal);
            m + s * z
        })
        .collect()
}

/// Generic CEM maximizer. `evaluate(iteration, population)` must return one
/// score per candidate, in order. Ties rank by candidate index.
pub fn cem_optimize<F>(init_mean: Vec<f64>, cfg: &CemConfig, mut evaluate: F) -> Result<(Vec<f64>, Vec<CemLogRow>)>
where
    F: FnMut(usize, &[Vec<f64>]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let dim = init_mean.len();
    let mut mean = init_mean;
    let mut std = vec![cfg.init_std; dim];
    let mut log = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let pop: Vec<Vec<f64>> = (0..cfg.population).map(|i| sample_candidate(&mean, &std, cfg.seed, it, i)).collect();
        let scores = evaluate(it, &pop)?;
        if scores.len() != pop.len() {
            return Err(Error::DimensionMismatch { expected: pop.len(), got: scores.len() });
        }
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let elites = &order[..cfg.elites];
        let k = cfg.elites as f64;
        for d in 0..dim {
            let m = elites.iter().map(|&i| pop[i][d]).sum::<f64>() / k;
            let v = elites.iter().map(|&i| (pop[i][d] - m) * (pop[i][d] - m)).sum::<f64>() / k;
            mean[d] = m;
            std[d] = libm::sqrt(v).max(cfg.std_floor);
        }
        log.push(CemLogRow {
            iteration: it,
            mean_return: scores.iter().sum::<f64>() / scores.len() as f64,
            elite_mean: elites.iter().map(|&i| scores[i]).sum::<f64>() / k,
            best_return: scores[order[0]],
            param_std: std.iter().sum::<f64>() / dim.max(1) as f64,
        });
    }
    Ok((mean, log))
}

/// Training episodes shared by every candidate of `iteration`.
pub fn iteration_episodes(cfg: &CemConfig, iteration: usize) -> Vec<Vec<TaskSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, STREAM_TASKS, iteration as u64]));
    (0..cfg.tasks_per_candidate)
        .map(|_| {
            let first = sample_task(&mut rng, cfg.horizon);
            let mut episode = vec![first.clone()];
            for _ in &first.resample_at {
                episode.push(sample_task(&mut rng, cfg.horizon));
            }
            if rng.random::<f64>() < cfg.mirror_prob {
                episode.iter().map(mirror_task).collect()
            } else {
                episode
            }
        })
        .collect()
}

/// Mean return of one parameter vector over a set of episodes.
pub fn score(params: &PolicyParams, mode: PolicyMode, episodes: &[Vec<TaskSpec>], cfg: &RolloutConfig) -> Result<f64> {
    let mut total = 0.0;
    for ep in episodes {
        total += rollout_return(params, mode, ep, cfg)?;
    }
    Ok(total / episodes.len() as f64)
}

/// Train with a caller-supplied population evaluator (for example a
/// parallel one). `evaluate(population, episodes)` returns one score per
/// candidate in order.
pub fn cem_train_with<E>(
    cfg: &CemConfig,
    mode: PolicyMode,
    mut evaluate: E,
) -> Result<(Policy, Vec<CemLogRow>)>
where
    E: FnMut(&[Vec<f64>], &[Vec<TaskSpec>]) -> Result<Vec<f64>>,
{
    let (mean, log) = cem_optimize(vec![0.0; PARAM_COUNT], cfg, |it, pop| {
        let episodes = iteration_episodes(cfg, it);
        evaluate(pop, &episodes)
    })?;
    Ok((Policy::new(mode, PolicyParams(mean))?, log))
}

/// Sequential training.
pub fn cem_train(cfg: &CemConfig, mode: PolicyMode, rollout_cfg: &RolloutConfig) -> Result<(Policy, Vec<CemLogRow>)> {
    let rcfg = RolloutConfig { horizon: cfg.horizon, ..rollout_cfg.clone() };
    cem_train_with(cfg, mode, |pop, episodes| {
        pop.iter().map(|p| score(&PolicyParams(p.clone()), mode, episodes, &rcfg)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn stand_category_has_zero_delta() {
        assert_eq!(sample_delta(&mut rng(1), TaskCategory::Stand), Pose2::IDENTITY);
    }

    #[test]
    fn category_frequencies() {
        let mut r = rng(2);
        let n = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            let c = sample_category(&mut r);
            counts[TaskCategory::ALL.iter().position(|&x| x == c).unwrap()] += 1;
        }
        for (k, p) in counts.iter().zip(TaskCategory::PROBS) {
            assert!((*k as f64 / n as f64 - p).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn deltas_respect_category_and_ranges() {
        let mut r = rng(3);
        for _ in 0..5000 {
            let t = sample_task(&mut r, 60);
            let d = t.delta();
            assert!(d.x.abs() <= MAX_DX + 1e-9 && d.y.abs() <= MAX_DY + 1e-9 && d.theta.abs() <= MAX_DTHETA);
            match t.category {
                TaskCategory::Stand => assert!(d.x.abs() < 1e-9 && d.y.abs() < 1e-9 && d.theta.abs() < 1e-9),
                TaskCategory::Straight => assert!(d.y.abs() < 1e-9 && d.theta.abs() < 1e-9),
                TaskCategory::Lateral => assert!(d.x.abs() < 1e-9 && d.theta.abs() < 1e-9),
                TaskCategory::Turn => assert!(d.x.abs() < 1e-9 && d.y.abs() < 1e-9),
                TaskCategory::Combined => {}
            }
        }
    }

    #[test]
    fn resample_gaps_in_range() {
        let mut r = rng(4);
        for _ in 0..2000 {
            let s = sample_schedule(&mut r, 200);
            let mut prev = 0;
            for &t in &s {
                assert!((RESAMPLE_MIN_GAP..=RESAMPLE_MAX_GAP).contains(&(t - prev)), "{s:?}");
                prev = t;
            }
            assert!(200 - prev <= RESAMPLE_MAX_GAP);
        }
    }

    fn task(delta: Pose2, category: TaskCategory) -> TaskSpec {
        let start = Pose2::new(0.3, -0.7, 1.1);
        TaskSpec {
            start,
            goal: start.compose(&delta),
            category,
            resample_at: vec![12, 30],
            first_swing: Foot::Right,
            perturb_seed: 9,
        }
    }

    #[test]
    fn mirror_is_an_involution() {
        let mut r = rng(5);
        for _ in 0..1000 {
            let t = sample_task(&mut r, 60);
            assert_eq!(mirror_task(&mirror_task(&t)), t);
        }
    }

    #[test]
    fn mirrored_straight_task_keeps_its_delta() {
        let t = task(Pose2::new(1.2, 0.0, 0.0), TaskCategory::Straight);
        let m = mirror_task(&t);
        let (a, b) = (t.delta(), m.delta());
        assert!((a.x - b.x).abs() < 1e-12 && b.y.abs() < 1e-12 && b.theta.abs() < 1e-12);
        assert_eq!(m.category, TaskCategory::Straight);
    }

    #[test]
    fn mirrored_lateral_task_flips_dy_only() {
        let t = task(Pose2::new(0.0, 0.8, 0.0), TaskCategory::Lateral);
        let d = mirror_task(&t).delta();
        assert!(d.x.abs() < 1e-12 && (d.y + 0.8).abs() < 1e-12 && d.theta.abs() < 1e-12);
    }

    fn still() -> RolloutConfig {
        RolloutConfig { perturb_scale: 0.0, ..RolloutConfig::default() }
    }

    #[test]
    fn zero_policy_on_stand_task_earns_the_horizon() {
        let t = task(Pose2::IDENTITY, TaskCategory::Stand);
        let cfg = still();
        for mode in [PolicyMode::Goto, PolicyMode::Hier] {
            let r = rollout(&PolicyParams::zeros(), mode, std::slice::from_ref(&t), &cfg).unwrap();
            assert!(r.rewards.iter().all(|&x| x == 1.0));
            assert_eq!(r.ret, cfg.horizon as f64);
            assert_eq!(r.state.footsteps(), 0);
        }
    }

    fn random_params(seed: u64, scale: f64) -> PolicyParams {
        PolicyParams(sample_candidate(&[0.0; PARAM_COUNT], &[scale; PARAM_COUNT], seed, 0, 0))
    }

    #[test]
    fn rollout_is_deterministic_and_bounded() {
        let cfg = RolloutConfig::default();
        let ccfg = CemConfig { seed: 11, ..CemConfig::default() };
        for (i, ep) in iteration_episodes(&ccfg, 0).iter().enumerate() {
            let p = random_params(i as u64, 0.5);
            let a = rollout(&p, PolicyMode::Goto, ep, &cfg).unwrap();
            let b = rollout(&p, PolicyMode::Goto, ep, &cfg).unwrap();
            assert_eq!(a.ret.to_bits(), b.ret.to_bits());
            assert!(a.ret <= cfg.horizon as f64);
            assert_eq!(rollout_return(&p, PolicyMode::Goto, ep, &cfg).unwrap().to_bits(), a.ret.to_bits());
        }
    }

    #[test]
    fn goal_is_resampled_relative_to_the_base() {
        let mut t = task(Pose2::new(1.0, 0.0, 0.0), TaskCategory::Straight);
        t.resample_at = vec![10];
        let next = task(Pose2::new(0.0, 0.0, 1.0), TaskCategory::Turn);
        let cfg = still();
        let r = rollout(&PolicyParams::zeros(), PolicyMode::Goto, &[t.clone(), next], &cfg).unwrap();
        assert_eq!(r.goals[9], t.goal);
        // The zero policy never moves, so the new goal is the start turned by 1 rad.
        let g = r.goals[10];
        assert!((g.x - t.start.x).abs() < 1e-12 && (g.y - t.start.y).abs() < 1e-12);
        assert!((g.theta - (t.start.theta + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(CemConfig::default().validate().is_ok());
        assert!(CemConfig { elites: 64, ..CemConfig::default() }.validate().is_err());
        assert!(CemConfig { population: 0, ..CemConfig::default() }.validate().is_err());
        assert!(CemConfig { std_floor: 0.0, ..CemConfig::default() }.validate().is_err());
        assert!(CemConfig { mirror_prob: 1.5, ..CemConfig::default() }.validate().is_err());
    }

    fn quadratic(target: &[f64]) -> impl FnMut(usize, &[Vec<f64>]) -> Result<Vec<f64>> + '_ {
        move |_, pop| {
            Ok(pop.iter().map(|p| -p.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).collect())
        }
    }

    #[test]
    fn cem_solves_a_concave_quadratic() {
        let target = [0.7, -1.3, 0.25, 2.0];
        let cfg = CemConfig { iterations: 100, seed: 3, ..CemConfig::default() };
        let (mean, log) = cem_optimize(vec![0.0; 4], &cfg, quadratic(&target)).unwrap();
        let err = mean.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(err < 1e-2, "distance {err}");
        assert_eq!(log.len(), 100);
        assert!(log.iter().all(|r| r.param_std >= cfg.std_floor));
    }

    #[test]
    fn population_order_does_not_matter() {
        let target = [0.1, 0.2, 0.3];
        let cfg = CemConfig { iterations: 20, seed: 5, ..CemConfig::default() };
        let (a, _) = cem_optimize(vec![0.0; 3], &cfg, quadratic(&target)).unwrap();
        // Score candidates back to front, as a concurrent evaluator might.
        let (b, _) = cem_optimize(vec![0.0; 3], &cfg, |_, pop| {
            let mut scores = vec![0.0; pop.len()];
            for i in (0..pop.len()).rev() {
                scores[i] = -pop[i].iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
            Ok(scores)
        })
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = CemConfig { iterations: 2, population: 8, elites: 2, tasks_per_candidate: 2, seed: 21, ..CemConfig::default() };
        let rc = RolloutConfig::default();
        let (a, la) = cem_train(&cfg, PolicyMode::Goto, &rc).unwrap();
        let (b, lb) = cem_train(&cfg, PolicyMode::Goto, &rc).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        let (c, _) = cem_train(&CemConfig { seed: 22, ..cfg }, PolicyMode::Goto, &rc).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn evaluator_length_is_checked() {
        let cfg = CemConfig { iterations: 1, ..CemConfig::default() };
        let r = cem_optimize(vec![0.0; 2], &cfg, |_, _| Ok(vec![0.0; 3]));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
