//! Run configuration: one TOML file with a section per component.
//!
//! ```toml
//! seed = 7
//! out = "runs/a"
//!
//! [stepper]
//! max_step_len = 0.35
//!
//! [cem]
//! iterations = 200
//! ```
//!
//! Every section and key is optional; missing values take their defaults and
//! unknown keys are rejected. The top-level `seed` is the master seed for
//! both training and evaluation and replaces `cem.seed`.

use std::path::{Path, PathBuf};

use goto_core::bench::{CommandGrid, TrialConfig};
use goto_core::reward::RewardConfig;
use goto_core::se2::Constellation;
use goto_core::sim::StepperConfig;
use goto_core::trainer::{CemConfig, RolloutConfig};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Constellation used by the training reward: points on a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    /// m
    pub radius: f64,
    pub points: usize,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        ConstellationConfig { radius: 1.0, points: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub stepper: StepperConfig,
    pub reward: RewardConfig,
    pub constellation: ConstellationConfig,
    pub cem: CemConfig,
    pub grid: CommandGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            stepper: StepperConfig::default(),
            reward: RewardConfig::default(),
            constellation: ConstellationConfig::default(),
            cem: CemConfig::default(),
            grid: CommandGrid::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Read `path`, or the defaults when `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| BenchError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.stepper.validate()?;
        self.reward.validate()?;
        self.cem_config().validate()?;
        self.grid.validate()?;
        Constellation::circle(self.constellation.radius, self.constellation.points)
            .map_err(|e| BenchError::Usage(format!("constellation: {e}")))?;
        Ok(())
    }

    pub fn cem_config(&self) -> CemConfig {
        CemConfig { seed: self.seed, ..self.cem.clone() }
    }

    pub fn rollout_config(&self) -> Result<RolloutConfig> {
        let constellation = Constellation::circle(self.constellation.radius, self.constellation.points)
            .map_err(|e| BenchError::Usage(format!("constellation: {e}")))?;
        Ok(RolloutConfig {
            stepper: self.stepper,
            reward: self.reward,
            constellation,
            perturb_scale: self.grid.perturb_scale,
            horizon: self.cem.horizon,
        })
    }

    pub fn trial_config(&self) -> TrialConfig {
        TrialConfig { stepper: self.stepper, perturb_scale: self.grid.perturb_scale, ..TrialConfig::default() }
    }
}
