//! Policy artifact: one line of JSON header, then the parameters as
//! little-endian `f64`s.

use std::path::Path;

use goto_core::policy::{Policy, PolicyMode, PolicyParams, LAYER_SIZES, PARAM_COUNT};
use goto_core::sim::StepperConfig;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyHeader {
    pub mode: PolicyMode,
    pub layer_sizes: Vec<usize>,
    pub action_scale: [f64; 3],
    pub seed: u64,
}

pub fn encode(policy: &Policy, seed: u64, stepper: &StepperConfig) -> Vec<u8> {
    let header = PolicyHeader {
        mode: policy.mode,
        layer_sizes: LAYER_SIZES.to_vec(),
        action_scale: policy.mode.action_scale(stepper),
        seed,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for v in &policy.params.0 {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<(PolicyHeader, Policy), String> {
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or("missing header line")?;
    let header: PolicyHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| format!("bad header: {e}"))?;
    if header.layer_sizes != LAYER_SIZES {
        return Err(format!("layer sizes {:?} do not match {:?}", header.layer_sizes, LAYER_SIZES));
    }
    let body = &bytes[nl + 1..];
    if body.len() != PARAM_COUNT * 8 {
        return Err(format!("expected {} parameter bytes, found {}", PARAM_COUNT * 8, body.len()));
    }
    let params: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if params.iter().any(|v| !v.is_finite()) {
        return Err("non-finite parameter".into());
    }
    let policy = Policy::new(header.mode, PolicyParams(params)).map_err(|e| e.to_string())?;
    Ok((header, policy))
}

pub fn save(path: &Path, policy: &Policy, seed: u64, stepper: &StepperConfig) -> Result<()> {
    std::fs::write(path, encode(policy, seed, stepper)).map_err(|e| BenchError::io(path, e))
}

pub fn load(path: &Path) -> Result<(PolicyHeader, Policy)> {
    let bytes =
        std::fs::read(path).map_err(|e| BenchError::Usage(format!("cannot read policy {}: {e}", path.display())))?;
    decode(&bytes).map_err(|e| BenchError::Usage(format!("invalid policy {}: {e}", path.display())))
}
