use thiserror::Error;

/// Failures surfaced by every module. Argument errors are caller mistakes,
/// resource errors mean a configured cap was hit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Argument(msg.into()))
}

pub(crate) fn resource<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Resource(msg.into()))
}
