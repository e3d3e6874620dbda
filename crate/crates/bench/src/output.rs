//! CSV and JSON writers. All numbers use Rust's shortest round-trip
//! formatting, so equal inputs give equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use goto_core::bench::{BenchReport, Command, METRICS};
use goto_core::controllers::ControllerId;
use goto_core::sim::StepRecord;
use goto_core::trainer::CemLogRow;

use crate::error::{BenchError, Result};

pub fn write(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

pub fn report_json(report: &BenchReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per controller: success counts, then mean, std and normalized
/// mean and std of every metric. Ratios without a finite value are empty.
pub fn table_csv(report: &BenchReport) -> String {
    let mut s = String::from("controller,trials,successes");
    for m in METRICS {
        write!(s, ",{m}_mean,{m}_std,{m}_norm_mean,{m}_norm_std").unwrap();
    }
    s.push('\n');
    for c in &report.controllers {
        write!(s, "{},{},{}", c.controller.name(), c.trials, c.successes).unwrap();
        for (raw, norm) in c.raw.iter().zip(&c.normalized) {
            write!(s, ",{},{},{},{}", raw.mean, raw.std, opt(norm.mean), opt(norm.std)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn difficulty_csv(report: &BenchReport) -> String {
    let mut s = String::from("difficulty,commands,controller,trials,time_s,energy_j,footsteps\n");
    for bin in &report.difficulty {
        for m in &bin.means {
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                bin.difficulty,
                bin.command_indices.len(),
                m.controller.name(),
                m.trials,
                m.time_s,
                m.energy_j,
                m.footsteps
            )
            .unwrap();
        }
    }
    s
}

pub fn train_log_csv(log: &[CemLogRow]) -> String {
    let mut s = String::from("iteration,mean_return,elite_mean,best_return,param_std\n");
    for r in log {
        writeln!(s, "{},{},{},{},{}", r.iteration, r.mean_return, r.elite_mean, r.best_return, r.param_std).unwrap();
    }
    s
}

pub fn trace_csv(steps: &[StepRecord]) -> String {
    let mut s = String::from("step_index,time_s,foot,x_m,y_m,theta_rad,energy_j\n");
    for (i, r) in steps.iter().enumerate() {
        writeln!(s, "{},{},{},{},{},{},{}", i, r.time, r.foot.label(), r.pose.x, r.pose.y, r.pose.theta, r.energy)
            .unwrap();
    }
    s
}

/// File stem for a trace: `trace_<controller>_r<r>_phi<phi>_th<theta>`.
pub fn trace_stem(id: ControllerId, c: &Command) -> String {
    format!("trace_{}_r{:.3}_phi{:.3}_th{:.3}", id.name(), c.r, c.phi, c.theta)
}
