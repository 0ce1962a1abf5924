use thiserror::Error;

/// Broad failure category, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid framework: {0}")]
    InvalidFramework(String),

    #[error("agents {0} and {1} share the same position")]
    CoincidentAgents(usize, usize),

    #[error("configuration is degenerate (all agents collinear)")]
    DegenerateConfiguration,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("generator failure: {0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) | Error::Io(_) => ErrorKind::Parse,
            Error::InvalidGraph(_)
            | Error::InvalidFramework(_)
            | Error::CoincidentAgents(..)
            | Error::InvalidArgument(_)
            | Error::Generator(_) => ErrorKind::Validation,
            Error::DegenerateConfiguration
            | Error::NonFinite(_)
            | Error::DimensionMismatch(_) => ErrorKind::Numerical,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
