use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no bracket: {0}")]
    NoBracket(String),
    #[error("maximum iterations reached: {0}")]
    MaxIter(String),
    #[error("diverged: {0}")]
    Diverged(String),
    #[error("bracket error: {0}")]
    BracketError(String),
    #[error("no bound state: {0}")]
    NoBoundState(String),
    #[error("gram matrix not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in JSON error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::Domain(_) => "Domain",
            Error::NoBracket(_) => "NoBracket",
            Error::MaxIter(_) => "MaxIter",
            Error::Diverged(_) => "Diverged",
            Error::BracketError(_) => "BracketError",
            Error::NoBoundState(_) => "NoBoundState",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
