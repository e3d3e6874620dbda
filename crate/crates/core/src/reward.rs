//! Rewards built on the constellation distance.

use alloc::format;

use crate::error::{Error, Result};
use crate::se2::DistanceBreakdown;

/// Reward weights. Decays are per m^2 (or per rad^2 for `w_o`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RewardConfig {
    /// Constellation decay `w_c`.
    pub w_c: f64,
    pub a_p: f64,
    pub a_o: f64,
    pub w_p: f64,
    pub w_o: f64,
    /// Weight on the squared change between consecutive actions.
    pub k_action: f64,
    /// Penalty per joule of step energy.
    pub k_energy: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { w_c: 0.2, a_p: 0.5, a_o: 0.5, w_p: 0.5, w_o: 0.5, k_action: 0.05, k_energy: 0.01 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("w_c", self.w_c),
            ("a_p", self.a_p),
            ("a_o", self.a_o),
            ("w_p", self.w_p),
            ("w_o", self.w_o),
            ("k_action", self.k_action),
            ("k_energy", self.k_energy),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("reward.{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.a_p + self.a_o <= 0.0 {
            return Err(Error::InvalidConfig("reward.a_p + reward.a_o must be > 0".into()));
        }
        Ok(())
    }
}

/// `exp(-w_c * d_con)`, in (0, 1].
pub fn constellation_reward(d: &DistanceBreakdown, cfg: &RewardConfig) -> f64 {
    libm::exp(-cfg.w_c * d.total)
}

/// Product form `exp(-w_c d_p) * exp(-w_c * rot)`; equal to
/// [`constellation_reward`] up to rounding.
pub fn constellation_reward_factored(d: &DistanceBreakdown, cfg: &RewardConfig) -> f64 {
    libm::exp(-cfg.w_c * d.positional) * libm::exp(-cfg.w_c * d.rotational_exact)
}

/// Additive position/orientation reward used as an ablation arm.
pub fn additive_reward(d_p: f64, d_o: f64, cfg: &RewardConfig) -> f64 {
    cfg.a_p * libm::exp(-cfg.w_p * d_p) + cfg.a_o * libm::exp(-cfg.w_o * d_o)
}

/// `-k_action * |action - prev|^2 - k_energy * step_energy`.
pub fn regularization_reward(prev_action: &[f64], action: &[f64], step_energy: f64, cfg: &RewardConfig) -> Result<f64> {
    if prev_action.len() != action.len() {
        return Err(Error::DimensionMismatch { expected: prev_action.len(), got: action.len() });
    }
    let change: f64 = prev_action.iter().zip(action).map(|(p, a)| (a - p) * (a - p)).sum();
    Ok(-cfg.k_action * change - cfg.k_energy * step_energy)
}

pub fn total_reward(
    d: &DistanceBreakdown,
    prev_action: &[f64],
    action: &[f64],
    step_energy: f64,
    cfg: &RewardConfig,
) -> Result<f64> {
    Ok(constellation_reward(d, cfg) + regularization_reward(prev_action, action, step_energy, cfg)?)
}
