//! Files, parallel runners and the command line for the footstep
//! locomotion benchmark built on `goto-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod policy_file;
pub mod runner;
pub mod svg;

pub use error::{BenchError, Result};
