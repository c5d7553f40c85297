use thiserror::Error;

/// Failure categories shared by every module.
///
/// The CLI maps `Input` and `Domain` to exit code 2 and the rest to 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("structural error: {0}")]
    Structural(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
