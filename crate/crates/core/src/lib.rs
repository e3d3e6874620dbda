//! Core of the SE(2)-target locomotion benchmark.
//!
//! Everything here is `no_std` + `alloc` and free of IO: pose algebra and the
//! constellation distance, rewards, a footstep-level stepper, the baseline
//! controllers, the feedforward policy and its cross-entropy trainer, and the
//! trial protocol with its metrics. File formats and the CLI live in the
//! `goto-bench` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bench;
pub mod controllers;
pub mod error;
pub mod policy;
pub mod reward;
pub mod se2;
pub mod sim;
pub mod trainer;

pub use error::{Error, Result};
