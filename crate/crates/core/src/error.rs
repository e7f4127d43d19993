use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is well formed but exceeds a size guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A computed object failed a self-check it is guaranteed to pass.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Capacity(_) => "capacity",
            Error::Consistency(_) => "consistency",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
