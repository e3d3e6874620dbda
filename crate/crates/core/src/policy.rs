//! Feedforward footstep policy: 6 inputs, two tanh layers of 32, 3 tanh outputs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::se2::Pose2;
use crate::sim::{Foot, FootstepAction, StepperConfig, StepperState};

pub const INPUTS: usize = 6;
pub const HIDDEN: usize = 32;
pub const OUTPUTS: usize = 3;
pub const LAYER_SIZES: [usize; 4] = [INPUTS, HIDDEN, HIDDEN, OUTPUTS];
pub const PARAM_COUNT: usize = INPUTS * HIDDEN + HIDDEN + HIDDEN * HIDDEN + HIDDEN + HIDDEN * OUTPUTS + OUTPUTS;

/// Outputs with Euclidean norm below this request a stand.
pub const STAND_THRESHOLD: f64 = 0.05;

/// Fixed gain on the output layer's weighted sum, `1 / sqrt(HIDDEN)`. Keeps
/// the output's sensitivity to parameter noise independent of the width.
pub const OUTPUT_GAIN: f64 = 0.176_776_695_296_636_9;

/// Steps over which the time input ramps from 0 to 1.
pub const TIME_SCALE_STEPS: f64 = 60.0;

/// What the three outputs mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PolicyMode {
    /// End-to-end: outputs are a footstep.
    Goto,
    /// Outputs are a base velocity command for the gait generator.
    Hier,
}

impl PolicyMode {
    pub fn name(self) -> &'static str {
        match self {
            PolicyMode::Goto => "goto",
            PolicyMode::Hier => "hier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "goto" => Some(PolicyMode::Goto),
            "hier" => Some(PolicyMode::Hier),
            _ => None,
        }
    }

    /// Per-output scale applied after the tanh.
    pub fn action_scale(self, cfg: &StepperConfig) -> [f64; 3] {
        match self {
            PolicyMode::Goto => [cfg.max_step_len, cfg.max_step_len, cfg.max_step_yaw],
            PolicyMode::Hier => {
                let v = cfg.max_step_len / cfg.step_duration;
                [v, v, cfg.max_step_yaw / cfg.step_duration]
            }
        }
    }
}

/// Flat parameter vector, layer by layer: weights (row-major, one row per
/// output unit) then biases. The output layer's weights are scaled by
/// [`OUTPUT_GAIN`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams(pub Vec<f64>);

impl PolicyParams {
    pub fn zeros() -> Self {
        PolicyParams(vec![0.0; PARAM_COUNT])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if self.0.len() != PARAM_COUNT {
            return Err(Error::ParamCount { expected: PARAM_COUNT, got: self.0.len() });
        }
        Ok(())
    }

    /// Network outputs in (-1, 1). The caller must have checked the length.
    pub fn forward(&self, obs: &[f64; INPUTS]) -> [f64; OUTPUTS] {
        let p = &self.0;
        let mut h1 = [0.0; HIDDEN];
        let mut h2 = [0.0; HIDDEN];
        let mut out = [0.0; OUTPUTS];
        let mut off = dense(p, 0, obs, &mut h1, 1.0);
        off = dense(p, off, &h1, &mut h2, 1.0);
        dense(p, off, &h2, &mut out, OUTPUT_GAIN);
        out
    }
}

/// `out = tanh(b + gain * W x)`, reading W then b from `p[off..]`. Returns
/// the offset past the layer.
fn dense(p: &[f64], off: usize, x: &[f64], out: &mut [f64], gain: f64) -> usize {
    let n_in = x.len();
    let bias = off + n_in * out.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &p[off + j * n_in..off + (j + 1) * n_in];
        let z = row.iter().zip(x).fold(0.0, |acc, (w, v)| acc + w * v);
        *o = libm::tanh(p[bias + j] + gain * z);
    }
    bias + out.len()
}

/// A trained network together with its output interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub mode: PolicyMode,
    pub params: PolicyParams,
}

impl Policy {
    pub fn new(mode: PolicyMode, params: PolicyParams) -> Result<Self> {
        params.check()?;
        Ok(Policy { mode, params })
    }
}

/// Observation: goal seen from the stance-anchored base frame, heading as
/// sin/cos, the swing foot (+1 left, -1 right) and normalized elapsed time.
///
/// The anchored frame is where the base will be once the swing foot lands at
/// its nominal slot; it coincides with the base whenever the feet are square
/// and, unlike the base, it fully determines where an action puts the foot.
pub fn observe(state: &StepperState, goal: &Pose2, steps_elapsed: usize, cfg: &StepperConfig) -> [f64; INPUTS] {
    let rel = state.anchor(cfg).between(goal);
    let swing = match state.swing() {
        Foot::Left => 1.0,
        Foot::Right => -1.0,
    };
    let t = (steps_elapsed as f64 / TIME_SCALE_STEPS).min(1.0);
    [rel.x, rel.y, libm::sin(rel.theta), libm::cos(rel.theta), swing, t]
}

/// True when the output is small enough to mean "stand".
pub fn wants_stand(out: &[f64; OUTPUTS]) -> bool {
    libm::sqrt(out.iter().map(|v| v * v).sum::<f64>()) < STAND_THRESHOLD
}

/// End-to-end action: scaled network output, or a stand.
pub fn goto_action(params: &PolicyParams, obs: &[f64; INPUTS], cfg: &StepperConfig) -> Result<FootstepAction> {
    params.check()?;
    let out = params.forward(obs);
    if wants_stand(&out) {
        return Ok(FootstepAction::STAND);
    }
    let s = PolicyMode::Goto.action_scale(cfg);
    Ok(FootstepAction::step(out[0] * s[0], out[1] * s[1], out[2] * s[2]))
}
