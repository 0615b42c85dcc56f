use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("solver instability: {0}")]
    Instability(String),

    #[error("no root found: {0}")]
    NotFound(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("malformed fixture: {0}")]
    Fixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
