use thiserror::Error;

/// Errors raised by the numerical core.
///
/// The variants are grouped the way callers react to them: structural and
/// argument errors mean the request was malformed, numeric and convergence
/// errors mean the computation could not certify its own accuracy, capability
/// errors mean a requested check needs data that was not supplied, and
/// capacity errors mean a configured size limit was hit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("capability missing: {0}")]
    Capability(String),

    #[error("capacity exceeded: {what} is {requested}, cap is {cap}")]
    Capacity {
        what: String,
        requested: usize,
        cap: usize,
    },
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
