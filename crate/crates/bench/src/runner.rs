//! Parallel training and evaluation. Results never depend on the thread
//! count: candidates and trials carry their own seeds and are reassembled in
//! index order.

use goto_core::bench::{run_trial, Command, CommandGrid, TrialConfig, TrialRecord, TrialRun};
use goto_core::controllers::ControllerId;
use goto_core::policy::{Policy, PolicyMode, PolicyParams};
use goto_core::trainer::{cem_train_with, score, CemConfig, CemLogRow, RolloutConfig};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{BenchError, Result};

pub const THREADS_ENV: &str = "GOTO_BENCH_THREADS";

/// Pool with `threads` workers; 0 picks the number of CPUs.
pub fn pool(threads: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Usage(format!("thread pool: {e}")))
}

/// Thread count from [`THREADS_ENV`]; unset or empty means 0 (auto).
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| BenchError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        _ => Ok(0),
    }
}

/// CEM training with the population scored in parallel.
pub fn train(
    cem: &CemConfig,
    mode: PolicyMode,
    rollout: &RolloutConfig,
    pool: &ThreadPool,
) -> Result<(Policy, Vec<CemLogRow>)> {
    let rcfg = RolloutConfig { horizon: cem.horizon, ..rollout.clone() };
    let out = pool.install(|| {
        cem_train_with(cem, mode, |pop, episodes| {
            pop.par_iter().map(|p| score(&PolicyParams(p.clone()), mode, episodes, &rcfg)).collect()
        })
    })?;
    Ok(out)
}

/// Policies for the learned controllers, looked up by mode.
#[derive(Debug, Clone, Default)]
pub struct Policies {
    pub goto: Option<Policy>,
    pub hier: Option<Policy>,
}

impl Policies {
    pub fn insert(&mut self, policy: Policy) {
        match policy.mode {
            PolicyMode::Goto => self.goto = Some(policy),
            PolicyMode::Hier => self.hier = Some(policy),
        }
    }

    pub fn for_controller(&self, id: ControllerId) -> Option<&Policy> {
        match id.policy_mode()? {
            PolicyMode::Goto => self.goto.as_ref(),
            PolicyMode::Hier => self.hier.as_ref(),
        }
    }
}

/// Every (controller, command, trial) of the grid, sorted by that key.
/// Also returns trial 0 of each (controller, command) for tracing.
pub fn evaluate(
    controllers: &[ControllerId],
    grid: &CommandGrid,
    seed: u64,
    cfg: &TrialConfig,
    policies: &Policies,
    pool: &ThreadPool,
) -> Result<(Vec<TrialRecord>, Vec<TrialRun>)> {
    grid.validate()?;
    let commands = grid.commands();
    let mut jobs: Vec<(ControllerId, usize, usize)> = Vec::new();
    for &id in controllers {
        for c in 0..commands.len() {
            for t in 0..grid.trials_per_command {
                jobs.push((id, c, t));
            }
        }
    }
    let runs: Vec<TrialRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(id, c, t)| run_trial(id, &commands[c], c, t, seed, cfg, policies.for_controller(id)))
            .collect::<goto_core::Result<Vec<_>>>()
    })?;
    let mut records = Vec::with_capacity(runs.len());
    let mut traces = Vec::new();
    for run in runs {
        records.push(run.record.clone());
        if run.record.trial == 0 {
            traces.push(run);
        }
    }
    records.sort_by_key(|r| r.sort_key());
    traces.sort_by_key(|r| r.record.sort_key());
    Ok((records, traces))
}

/// Single trial used by the `trace` command.
pub fn trace(
    id: ControllerId,
    command: &Command,
    seed: u64,
    cfg: &TrialConfig,
    policies: &Policies,
) -> Result<TrialRun> {
    Ok(run_trial(id, command, 0, 0, seed, cfg, policies.for_controller(id))?)
}
