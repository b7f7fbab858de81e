use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Inputs outside the contract of an operation.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A count left the representable range; results are never wrapped.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    /// An internal consistency check failed; the result would be wrong.
    #[error("invariant violation: {0}")]
    Invariant(String),
    /// Parameters are valid but no scheme is defined for them.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
