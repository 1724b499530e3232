use thiserror::Error;

/// Errors raised by the optimisation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum UboError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

pub type Result<T, E = UboError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> UboError {
    UboError::InvalidArgument(msg.into())
}
