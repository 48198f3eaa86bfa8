//! Error type shared by all engines.

use thiserror::Error;

/// Failure modes of library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input lies outside the mathematical domain of the operation.
    #[error("domain violation: {0}")]
    Domain(String),
    /// A numerical tolerance could not be met.
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    /// Structurally invalid input (shape, ordering, mismatch).
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn tolerance(msg: impl Into<String>) -> Self {
        Error::Tolerance(msg.into())
    }
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;
