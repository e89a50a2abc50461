use thiserror::Error;

/// Library-wide error type.
///
/// `ResourceLimit` is deliberately distinct from the validation errors: the
/// CLI maps it to its own exit code so scripted experiments can tell "you
/// asked for something enormous" apart from "you asked for something
/// malformed".
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: ground set of size {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
