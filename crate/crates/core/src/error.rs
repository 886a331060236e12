use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An operation was called in the wrong lifecycle state, e.g. backward
    /// without a cached training-mode forward pass.
    #[error("invalid state: {0}")]
    State(String),

    #[error("unsupported transform length {0} (must be a power of two)")]
    UnsupportedLength(usize),

    /// The requested target is not bracketed by the supplied data.
    #[error("out of range: {0}")]
    Range(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("non-finite numeric result: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
