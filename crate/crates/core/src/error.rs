use alloc::string::String;

/// Errors surfaced by the simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no calibration rows for n_bits = {0}")]
    MissingCalibration(u32),
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("invalid session configuration: {0}")]
    Config(String),
    #[error("agent backend failure: {0}")]
    Backend(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
