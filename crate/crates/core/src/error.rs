use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("unsupported Gram rank {rank}; the Gaussian comparator needs rank <= 2")]
    UnsupportedRank { rank: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("not evaluable: {0}")]
    NotEvaluable(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
