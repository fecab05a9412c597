use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Bytes or bits could not be parsed.
    #[error("format error: {0}")]
    Format(String),
    /// An exhaustive search would exceed the configured work limit.
    #[error("refused: search space of {required} exceeds limit {limit}")]
    Refused { required: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn format<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}
