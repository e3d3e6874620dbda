//! Trial protocol, per-trial metrics and report aggregation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::controllers::{Controller, ControllerId, Tuning};
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::se2::{orientation_error, position_error, Pose2};
use crate::sim::{StepperConfig, StepperState};

/// Trials that have not settled after this many actions fail.
pub const MAX_TRIAL_STEPS: usize = 200;

/// Commands shorter than this report raw energy instead of energy per meter.
pub const MIN_DISTANCE_FOR_EPM: f64 = 0.1;

/// Evaluation grid of SE(2) commands, all issued from the origin facing +x.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CommandGrid {
    /// m
    pub distances: Vec<f64>,
    /// rad
    pub approach_angles: Vec<f64>,
    /// rad
    pub headings: Vec<f64>,
    pub trials_per_command: usize,
    /// Initial foot perturbation, m and rad.
    pub perturb_scale: f64,
}

impl Default for CommandGrid {
    fn default() -> Self {
        use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        let quarter = alloc::vec![0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
        CommandGrid {
            distances: alloc::vec![0.5, 1.0, 2.0, 4.0],
            approach_angles: quarter.clone(),
            headings: quarter,
            trials_per_command: 16,
            perturb_scale: 0.02,
        }
    }
}

impl CommandGrid {
    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() || self.approach_angles.is_empty() || self.headings.is_empty() {
            return Err(Error::InvalidConfig("grid axes must be non-empty".into()));
        }
        if self.trials_per_command == 0 {
            return Err(Error::InvalidConfig("grid.trials_per_command must be > 0".into()));
        }
        let all = self.distances.iter().chain(&self.approach_angles).chain(&self.headings);
        if all.clone().any(|v| !v.is_finite()) || self.distances.iter().any(|&r| r < 0.0) {
            return Err(Error::InvalidConfig("grid values must be finite, distances >= 0".into()));
        }
        if !self.perturb_scale.is_finite() || self.perturb_scale < 0.0 {
            return Err(Error::InvalidConfig(format!("grid.perturb_scale must be >= 0, got {}", self.perturb_scale)));
        }
        Ok(())
    }

    /// Commands in (distance, approach angle, heading) lexicographic order.
    pub fn commands(&self) -> Vec<Command> {
        let mut out = Vec::new();
        for &r in &self.distances {
            for &phi in &self.approach_angles {
                for &theta in &self.headings {
                    out.push(Command { r, phi, theta });
                }
            }
        }
        out
    }

    /// Same grid restricted to distances `<= max_r`.
    pub fn with_max_distance(&self, max_r: f64) -> Self {
        CommandGrid { distances: self.distances.iter().copied().filter(|&r| r <= max_r).collect(), ..self.clone() }
    }
}

/// Target at `(r cos phi, r sin phi)` with final heading `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Command {
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
}

impl Command {
    pub fn goal(&self) -> Pose2 {
        Pose2::new(self.r * libm::cos(self.phi), self.r * libm::sin(self.phi), self.theta)
    }

    /// Commands that move the base and also turn it.
    pub fn is_combined(&self) -> bool {
        self.r > 0.0 && self.theta != 0.0
    }
}

/// One evaluated trial.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialRecord {
    pub controller: ControllerId,
    pub command_index: usize,
    pub command: Command,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    /// m
    pub pos_error: f64,
    /// rad
    pub ang_error: f64,
    /// s
    pub time_s: f64,
    pub footsteps: usize,
    /// J
    pub energy_j: f64,
    /// J/m; absent for commands shorter than [`MIN_DISTANCE_FOR_EPM`].
    pub energy_per_meter: Option<f64>,
}

impl TrialRecord {
    /// Sort key that makes aggregation independent of execution order.
    pub fn sort_key(&self) -> (ControllerId, usize, usize) {
        (self.controller, self.command_index, self.trial)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a tuple of words.
pub fn mix_seed(words: &[u64]) -> u64 {
    words.iter().fold(0x6A09_E667_F3BC_C908, |h, &w| splitmix64(h ^ splitmix64(w)))
}

/// Seed of the initial perturbation. The controller is deliberately not an
/// input, so every controller sees the same perturbations.
pub fn trial_seed(master: u64, command_index: usize, trial: usize) -> u64 {
    mix_seed(&[master, command_index as u64, trial as u64])
}

/// Configuration shared by all trials of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub stepper: StepperConfig,
    pub tuning: Tuning,
    pub perturb_scale: f64,
    pub max_steps: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            stepper: StepperConfig::default(),
            tuning: Tuning::default(),
            perturb_scale: CommandGrid::default().perturb_scale,
            max_steps: MAX_TRIAL_STEPS,
        }
    }
}

/// Result of one trial: the record plus the simulator state it ended in.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub record: TrialRecord,
    pub start: Pose2,
    pub goal: Pose2,
    pub initial: StepperState,
    pub last: StepperState,
    /// Actions issued, including stands.
    pub actions: usize,
}

/// Run `controller` from `initial` toward `goal` until settled or the step cap.
pub fn run_from(
    controller: &mut Controller<'_>,
    initial: StepperState,
    goal: &Pose2,
    cfg: &TrialConfig,
) -> Result<(StepperState, usize, bool)> {
    let mut state = initial;
    let tol = &cfg.tuning;
    let mut actions = 0;
    while actions < cfg.max_steps {
        if state.is_settled(goal, tol.pos_tol, tol.ang_tol, &cfg.stepper) {
            return Ok((state, actions, true));
        }
        let a = controller.act(&state, goal, actions, &cfg.stepper, tol)?;
        state.step(&a, &cfg.stepper)?;
        actions += 1;
    }
    let ok = state.is_settled(goal, tol.pos_tol, tol.ang_tol, &cfg.stepper);
    Ok((state, actions, ok))
}

/// Time to target: clock at the last footstep plus the settle allowance.
pub fn time_to_target(state: &StepperState, cfg: &StepperConfig) -> f64 {
    state.step_log().last().map_or(0.0, |s| s.time) + cfg.settle_duration
}

/// One trial of the protocol: perturbed nominal stance at the origin, run
/// until settled or [`TrialConfig::max_steps`] actions.
pub fn run_trial(
    id: ControllerId,
    command: &Command,
    command_index: usize,
    trial: usize,
    master_seed: u64,
    cfg: &TrialConfig,
    policy: Option<&Policy>,
) -> Result<TrialRun> {
    let mut controller = Controller::new(id, policy)?;
    let seed = trial_seed(master_seed, command_index, trial);
    let start = Pose2::IDENTITY;
    let goal = command.goal();
    let initial =
        StepperState::reset(&start, cfg.perturb_scale, &mut ChaCha8Rng::seed_from_u64(seed), &cfg.stepper);
    let (last, actions, success) = run_from(&mut controller, initial.clone(), &goal, cfg)?;
    let base = last.base();
    let energy_j = last.energy();
    let record = TrialRecord {
        controller: id,
        command_index,
        command: *command,
        trial,
        seed,
        success,
        pos_error: position_error(&base, &goal),
        ang_error: orientation_error(base.theta, goal.theta),
        time_s: time_to_target(&last, &cfg.stepper),
        footsteps: last.footsteps(),
        energy_j,
        energy_per_meter: (command.r >= MIN_DISTANCE_FOR_EPM).then(|| energy_j / command.r),
    };
    Ok(TrialRun { record, start, goal, initial, last, actions })
}

/// `E = ∫ Σ_i τ_i(t) ω_i(t) dt` by the trapezoidal rule; series are indexed
/// `[joint][sample]` with uniform spacing `dt`.
pub fn energy_integral(torques: &[Vec<f64>], velocities: &[Vec<f64>], dt: f64) -> Result<f64> {
    if torques.len() != velocities.len() {
        return Err(Error::DimensionMismatch { expected: torques.len(), got: velocities.len() });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidConfig(format!("dt must be > 0, got {dt}")));
    }
    let samples = torques.first().map_or(0, Vec::len);
    for (t, w) in torques.iter().zip(velocities) {
        if t.len() != samples {
            return Err(Error::DimensionMismatch { expected: samples, got: t.len() });
        }
        if w.len() != samples {
            return Err(Error::DimensionMismatch { expected: samples, got: w.len() });
        }
    }
    if samples < 2 {
        return Ok(0.0);
    }
    let power = |k: usize| torques.iter().zip(velocities).map(|(t, w)| t[k] * w[k]).sum::<f64>();
    let mut acc = 0.0;
    let mut prev = power(0);
    for k in 1..samples {
        let p = power(k);
        acc += 0.5 * (prev + p) * dt;
        prev = p;
    }
    Ok(acc)
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: impl Iterator<Item = f64> + Clone) -> Stat {
        let n = values.clone().count();
        if n == 0 {
            return Stat { mean: 0.0, std: 0.0, n: 0 };
        }
        let mean = values.clone().sum::<f64>() / n as f64;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        Stat { mean, std: libm::sqrt(var), n }
    }
}

/// Metrics in table order.
pub const METRICS: [&str; 6] = ["energy_j", "time_s", "footsteps", "pos_error_m", "ang_error_rad", "energy_per_meter"];

fn metric(r: &TrialRecord, m: usize) -> Option<f64> {
    match m {
        0 => Some(r.energy_j),
        1 => Some(r.time_s),
        2 => Some(r.footsteps as f64),
        3 => Some(r.pos_error),
        4 => Some(r.ang_error),
        _ => r.energy_per_meter,
    }
}

/// Ratio to the baseline; `None` when the baseline mean is zero and the value
/// is not, since no finite ratio exists.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Normalized {
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

fn ratio(v: f64, base: f64) -> Option<f64> {
    if base != 0.0 {
        Some(v / base)
    } else if v == 0.0 {
        Some(1.0)
    } else {
        None
    }
}

/// Per-controller summary row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControllerSummary {
    pub controller: ControllerId,
    pub trials: usize,
    pub successes: usize,
    /// Over successful trials, in [`METRICS`] order.
    pub raw: Vec<Stat>,
    /// Raw stats divided by the baseline's means.
    pub normalized: Vec<Normalized>,
}

/// Trial that did not settle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Failure {
    pub controller: ControllerId,
    pub command_index: usize,
    pub command: Command,
    pub trial: usize,
    pub pos_error: f64,
    pub ang_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchReport {
    pub baseline: ControllerId,
    pub metrics: Vec<String>,
    pub controllers: Vec<ControllerSummary>,
    pub difficulty: Vec<DifficultyBin>,
    pub failures: Vec<Failure>,
}

fn sorted(records: &[TrialRecord]) -> Vec<&TrialRecord> {
    let mut v: Vec<&TrialRecord> = records.iter().collect();
    v.sort_by_key(|r| r.sort_key());
    v
}

/// Per-controller statistics over successful trials, normalized by the
/// baseline controller's means. Failures are listed separately.
pub fn aggregate(records: &[TrialRecord]) -> Result<BenchReport> {
    let records = sorted(records);
    let mut by: BTreeMap<ControllerId, Vec<&TrialRecord>> = BTreeMap::new();
    for r in &records {
        by.entry(r.controller).or_default().push(r);
    }
    let baseline = ControllerId::BASELINE;
    if !by.contains_key(&baseline) {
        return Err(Error::MissingBaseline(baseline.name()));
    }
    let raw_of = |rs: &[&TrialRecord]| -> Vec<Stat> {
        (0..METRICS.len())
            .map(|m| Stat::of(rs.iter().filter(|r| r.success).filter_map(move |r| metric(r, m))))
            .collect()
    };
    let base_raw = raw_of(&by[&baseline]);
    let controllers = by
        .iter()
        .map(|(&id, rs)| {
            let raw = raw_of(rs);
            let normalized = raw
                .iter()
                .zip(&base_raw)
                .map(|(s, b)| Normalized { mean: ratio(s.mean, b.mean), std: ratio(s.std, b.mean) })
                .collect();
            ControllerSummary { controller: id, trials: rs.len(), successes: rs.iter().filter(|r| r.success).count(), raw, normalized }
        })
        .collect();
    let failures = records
        .iter()
        .filter(|r| !r.success)
        .map(|r| Failure {
            controller: r.controller,
            command_index: r.command_index,
            command: r.command,
            trial: r.trial,
            pos_error: r.pos_error,
            ang_error: r.ang_error,
        })
        .collect();
    let difficulty = difficulty_curves(&records.iter().map(|r| (*r).clone()).collect::<Vec<_>>())?;
    Ok(BenchReport { baseline, metrics: METRICS.iter().map(|m| String::from(*m)).collect(), controllers, difficulty, failures })
}

/// Per-controller means inside one difficulty bin.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinMeans {
    pub controller: ControllerId,
    pub trials: usize,
    pub time_s: f64,
    pub energy_j: f64,
    pub footsteps: f64,
}

/// Commands whose baseline step count rounds to `difficulty`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DifficultyBin {
    pub difficulty: u32,
    pub command_indices: Vec<usize>,
    pub means: Vec<BinMeans>,
}

/// Difficulty of every command: mean baseline footsteps over its trials.
pub fn command_difficulty(records: &[TrialRecord]) -> Result<BTreeMap<usize, f64>> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in sorted(records).into_iter().filter(|r| r.controller == ControllerId::BASELINE) {
        let e = acc.entry(r.command_index).or_insert((0.0, 0));
        e.0 += r.footsteps as f64;
        e.1 += 1;
    }
    if acc.is_empty() {
        return Err(Error::MissingBaseline(ControllerId::BASELINE.name()));
    }
    Ok(acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

/// Bin commands by baseline difficulty and average time, energy and
/// footsteps per controller within each bin (successful trials only).
pub fn difficulty_curves(records: &[TrialRecord]) -> Result<Vec<DifficultyBin>> {
    let diff = command_difficulty(records)?;
    let mut bins: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (&cmd, &d) in &diff {
        bins.entry(libm::round(d) as u32).or_default().push(cmd);
    }
    let records = sorted(records);
    let mut controllers: Vec<ControllerId> = records.iter().map(|r| r.controller).collect();
    controllers.dedup();
    Ok(bins
        .into_iter()
        .map(|(difficulty, command_indices)| {
            let means = controllers
                .iter()
                .map(|&c| {
                    let rs: Vec<&&TrialRecord> = records
                        .iter()
                        .filter(|r| r.controller == c && r.success && command_indices.contains(&r.command_index))
                        .collect();
                    let n = rs.len();
                    let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
                        if n == 0 {
                            0.0
                        } else {
                            rs.iter().map(|r| f(r)).sum::<f64>() / n as f64
                        }
                    };
                    BinMeans {
                        controller: c,
                        trials: n,
                        time_s: mean(&|r| r.time_s),
                        energy_j: mean(&|r| r.energy_j),
                        footsteps: mean(&|r| r.footsteps as f64),
                    }
                })
                .collect();
            DifficultyBin { difficulty, command_indices, means }
        })
        .collect())
}

/// Divide every normalized mean by the corresponding entry of `by`.
pub fn renormalize(report: &BenchReport, by: &BenchReport) -> Result<BenchReport> {
    let base = by
        .controllers
        .iter()
        .find(|c| c.controller == by.baseline)
        .ok_or(Error::MissingBaseline(by.baseline.name()))?;
    let mut out = report.clone();
    for c in &mut out.controllers {
        for (n, b) in c.normalized.iter_mut().zip(&base.normalized) {
            n.mean = match (n.mean, b.mean) {
                (Some(v), Some(bm)) => ratio(v, bm),
                _ => None,
            };
        }
    }
    Ok(out)
}
