//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Rejected input: degenerate geometry, out-of-range parameter, bad dimension.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed input file, reported with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An enumeration or sampling budget was exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A state that the library itself promises never to produce.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
