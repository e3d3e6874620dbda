use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid constellation: {0}")]
    InvalidConstellation(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter count mismatch: expected {expected}, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("no records for baseline controller {0}")]
    MissingBaseline(&'static str),
    #[error("controller {0} needs a trained policy")]
    MissingPolicy(&'static str),
    #[error("policy mode {found} does not match controller {expected}")]
    PolicyMode { expected: &'static str, found: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
