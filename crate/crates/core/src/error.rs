//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A shape or dimension precondition was violated.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A configuration value is outside its documented domain.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An input value is outside the operation's domain (non-finite,
    /// zero-norm vector in a cosine, empty batch, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numeric result left the representable/finite domain.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Checkpoint or dataset file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
