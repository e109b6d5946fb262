//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Array or dataset shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The regression response never varies, so no penalty grid and no
    /// nontrivial fit exist for it.
    #[error("constant response: {0}")]
    ConstantResponse(String),

    /// Exact enumeration over all 2^p configurations was requested for a
    /// model too large to enumerate.
    #[error("exact enumeration supports at most {max} nodes, got {got}")]
    TooManyNodes { got: usize, max: usize },

    /// File contents failed validation (non-binary entries, ragged rows,
    /// inconsistent edge lists, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
