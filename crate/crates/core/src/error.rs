use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy not met: {0}")]
    AccuracyNotMet(String),

    #[error("quadrature did not converge after {segments} segments (error estimate {error:e})")]
    NonConvergence { segments: usize, error: f64 },

    #[error("iteration cap of {cap} exceeded ({what})")]
    CapExceeded { cap: u64, what: &'static str },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precision budget exceeded: condition estimate {condition:e}")]
    Precision { condition: f64 },

    #[error("unsupported numeric range: {0}")]
    UnsupportedRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Parse(e.to_string()),
        }
    }
}
