use thiserror::Error;

/// Failure categories shared by every module.
///
/// The split matters to callers: `Domain` means the inputs lie outside the
/// region where the quantity exists, `Contract` means the caller passed
/// structurally inconsistent arguments, `Config` is a bad setting, and
/// `Numeric` is an iterative method that did not converge.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure after {iterations} iterations: {message}")]
    Numeric { message: String, iterations: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
