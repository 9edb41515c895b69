//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HolderError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid argument (empty grid, mismatched shapes, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// Evaluation outside a tabulated range without an extrapolation policy.
    #[error("range error: {0}")]
    Range(String),

    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Operation not supported for the given geometry or target dimension.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Approximation-plan selection failed; `clause` names the failing
    /// parameter condition (`small_scale`, `far_radius`, `truncation_radius`).
    #[error("plan failure [{clause}]: {msg}")]
    Plan { clause: String, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HolderError>;
