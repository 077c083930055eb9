use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("site {site_id}: {reason}")]
    InvalidSite { site_id: String, reason: String },

    #[error("estimation impossible: {0}")]
    EstimationImpossible(String),

    #[error("unsupported design: {0}")]
    UnsupportedDesign(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
