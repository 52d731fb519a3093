use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, lengths, or mode counts do not line up.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// An argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation requires a nonzero input.
    #[error("zero input: {0}")]
    ZeroInput(&'static str),

    /// A numeric invariant failed at run time.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
