use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("outside function domain: {0}")]
    Domain(String),
    #[error("infeasible allocation: {0}")]
    Infeasible(String),
    #[error("objective unbounded below: {0}")]
    Unbounded(String),
}

pub type Result<V> = std::result::Result<V, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn infeasible(msg: impl Into<String>) -> Error {
    Error::Infeasible(msg.into())
}
