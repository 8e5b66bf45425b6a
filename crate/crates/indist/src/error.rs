use thiserror::Error;

/// Errors produced by the library.
///
/// Domain errors (bad parameters, malformed input) map to CLI exit code 1,
/// capacity errors to exit code 2, and audit violations to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo {lo} > hi {hi}")]
    InvalidRange { lo: String, hi: String },

    #[error("value kinds do not match: {left} vs {right}")]
    KindMismatch { left: String, right: String },

    #[error("weights do not sum to 1 (got {got})")]
    Normalization { got: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: predicted {predicted} atoms, cap {cap}")]
    Capacity { predicted: String, cap: u64 },

    #[error("conditioning on an event of probability zero")]
    ConditionOnNull,

    #[error("mapping undefined on support point {0}")]
    Mapping(String),

    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
