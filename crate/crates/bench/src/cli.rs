use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use goto_core::bench::{aggregate, Command, CommandGrid};
use goto_core::controllers::ControllerId;
use goto_core::policy::PolicyMode;

use crate::config::RunConfig;
use crate::error::{BenchError, Result};
use crate::output::{self, write};
use crate::runner::{self, Policies};
use crate::{policy_file, svg};

#[derive(Debug, Parser)]
#[command(
    name = "goto-bench",
    version,
    about = "Train and benchmark footstep controllers that walk to SE(2) targets",
    after_help = "Environment:\n  GOTO_BENCH_THREADS  worker threads for training and evaluation (0 or unset = one per CPU)\n\nExit codes: 0 success, 1 usage or configuration error, 2 runtime failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Train a policy with the cross-entropy method.
    Train(TrainArgs),
    /// Run the evaluation grid and write report.json, table.csv, difficulty.csv and traces.
    Eval(EvalArgs),
    /// Run one command and write its footstep trace as SVG and CSV.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration file (TOML; defaults when omitted)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed (integer, overrides the config)
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (path, created if missing; overrides the config)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Policy output meaning: goto (footsteps, m and rad) or hier (base velocity, m/s and rad/s)
    #[arg(long, default_value = "goto", value_name = "MODE")]
    pub mode: String,
    /// CEM iterations (count, overrides the config)
    #[arg(long, value_name = "N")]
    pub iterations: Option<usize>,
    /// CEM population size (count, overrides the config)
    #[arg(long, value_name = "N")]
    pub population: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated controller names (fsm, agility2, agility3, hier, goto; must include agility2)
    #[arg(long, default_value = "fsm,agility2,agility3", value_name = "LIST")]
    pub controllers: String,
    /// Trained policy file (path, repeatable; its header names the mode)
    #[arg(long = "policy", value_name = "PATH")]
    pub policies: Vec<PathBuf>,
    /// Command grid file (TOML with distances in m, approach_angles and headings in rad, trials_per_command, perturb_scale in m and rad)
    #[arg(long, value_name = "PATH")]
    pub grid: Option<PathBuf>,
    /// Keep only commands with distance at most this (m)
    #[arg(long, value_name = "M")]
    pub max_distance: Option<f64>,
    /// Trials per command (count, overrides the grid)
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Controller name (fsm, agility2, agility3, hier or goto)
    #[arg(long, value_name = "NAME")]
    pub controller: String,
    /// Target as r,phi,theta (m, rad, rad), reached from the origin facing +x
    #[arg(long, value_name = "R,PHI,THETA", allow_hyphen_values = true)]
    pub command: String,
    /// Trained policy file for hier or goto (path)
    #[arg(long, value_name = "PATH")]
    pub policy: Option<PathBuf>,
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

pub fn parse_controllers(list: &str) -> Result<Vec<ControllerId>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let id = ControllerId::parse(name).ok_or_else(|| BenchError::Usage(format!("unknown controller {name:?}")))?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return Err(BenchError::Usage("no controllers given".into()));
    }
    out.sort();
    Ok(out)
}

pub fn parse_command(s: &str) -> Result<Command> {
    let bad = || BenchError::Usage(format!("command must be r,phi,theta (m, rad, rad), got {s:?}"));
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    match v[..] {
        [r, phi, theta] if r >= 0.0 && v.iter().all(|x| x.is_finite()) => Ok(Command { r, phi, theta }),
        _ => Err(bad()),
    }
}

fn load_policies(paths: &[PathBuf]) -> Result<Policies> {
    let mut p = Policies::default();
    for path in paths {
        let (_, policy) = policy_file::load(path)?;
        p.insert(policy);
    }
    Ok(p)
}

fn check_policies(ids: &[ControllerId], policies: &Policies) -> Result<()> {
    for &id in ids {
        if id.policy_mode().is_some() && policies.for_controller(id).is_none() {
            return Err(BenchError::Usage(format!("controller {} needs --policy with a {} policy", id.name(), id.name())));
        }
    }
    Ok(())
}

pub fn policy_path(dir: &Path, mode: PolicyMode) -> PathBuf {
    dir.join(format!("policy_{}.bin", mode.name()))
}

fn train(args: &TrainArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    let mode = PolicyMode::parse(&args.mode)
        .ok_or_else(|| BenchError::Usage(format!("--mode must be goto or hier, got {:?}", args.mode)))?;
    if let Some(n) = args.iterations {
        cfg.cem.iterations = n;
    }
    if let Some(n) = args.population {
        cfg.cem.population = n;
    }
    cfg.validate()?;
    let pool = runner::pool(runner::threads_from_env()?)?;
    let t0 = Instant::now();
    let (policy, log) = runner::train(&cfg.cem_config(), mode, &cfg.rollout_config()?, &pool)?;
    create_dir(&cfg.out)?;
    let path = policy_path(&cfg.out, mode);
    policy_file::save(&path, &policy, cfg.seed, &cfg.stepper)?;
    write(&cfg.out.join("train_log.csv"), output::train_log_csv(&log).as_bytes())?;
    let last = log.last().expect("at least one iteration");
    println!(
        "trained {} policy: {} iterations in {:.1} s, final elite mean {:.3}; wrote {}",
        mode.name(),
        log.len(),
        t0.elapsed().as_secs_f64(),
        last.elite_mean,
        path.display()
    );
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    let ids = parse_controllers(&args.controllers)?;
    if !ids.contains(&ControllerId::BASELINE) {
        return Err(BenchError::Usage(format!("--controllers must include the baseline {}", ControllerId::BASELINE.name())));
    }
    if let Some(path) = &args.grid {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Usage(format!("cannot read grid {}: {e}", path.display())))?;
        cfg.grid = toml::from_str::<CommandGrid>(&text)
            .map_err(|e| BenchError::Usage(format!("invalid grid {}: {e}", path.display())))?;
    }
    if let Some(m) = args.max_distance {
        cfg.grid = cfg.grid.with_max_distance(m);
    }
    if let Some(n) = args.trials {
        cfg.grid.trials_per_command = n;
    }
    cfg.grid.validate()?;
    let policies = load_policies(&args.policies)?;
    check_policies(&ids, &policies)?;

    let pool = runner::pool(runner::threads_from_env()?)?;
    let (records, traces) = runner::evaluate(&ids, &cfg.grid, cfg.seed, &cfg.trial_config(), &policies, &pool)?;
    let report = aggregate(&records)?;

    create_dir(&cfg.out)?;
    write(&cfg.out.join("report.json"), output::report_json(&report).as_bytes())?;
    write(&cfg.out.join("table.csv"), output::table_csv(&report).as_bytes())?;
    write(&cfg.out.join("difficulty.csv"), output::difficulty_csv(&report).as_bytes())?;
    let dir = cfg.out.join("traces");
    create_dir(&dir)?;
    for run in &traces {
        let stem = output::trace_stem(run.record.controller, &run.record.command);
        let steps = run.last.step_log();
        write(&dir.join(format!("{stem}.svg")), svg::render_trace(&run.start, &run.goal, steps).as_bytes())?;
        write(&dir.join(format!("{stem}.csv")), output::trace_csv(steps).as_bytes())?;
    }
    for c in &report.controllers {
        println!("{:>9}: {}/{} settled", c.controller.name(), c.successes, c.trials);
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn trace(args: &TraceArgs) -> Result<()> {
    let cfg = resolve(&args.common)?;
    let id = ControllerId::parse(&args.controller)
        .ok_or_else(|| BenchError::Usage(format!("unknown controller {:?}", args.controller)))?;
    let command = parse_command(&args.command)?;
    let policies = load_policies(args.policy.as_slice())?;
    check_policies(&[id], &policies)?;
    let run = runner::trace(id, &command, cfg.seed, &cfg.trial_config(), &policies)?;
    create_dir(&cfg.out)?;
    let stem = output::trace_stem(id, &command);
    let steps = run.last.step_log();
    write(&cfg.out.join(format!("{stem}.svg")), svg::render_trace(&run.start, &run.goal, steps).as_bytes())?;
    write(&cfg.out.join(format!("{stem}.csv")), output::trace_csv(steps).as_bytes())?;
    println!(
        "{}: {} footsteps, {}, wrote {}",
        id.name(),
        steps.len(),
        if run.record.success { "settled" } else { "did not settle" },
        cfg.out.join(format!("{stem}.svg")).display()
    );
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Cmd::Train(a) => train(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Trace(a) => trace(a),
    }
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
