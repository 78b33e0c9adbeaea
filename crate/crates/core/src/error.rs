use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Divergence of a condition integral is not an error: reports carry a
/// divergent flag instead. Only the operations whose contract has no
/// divergent state (e.g. [`crate::weight::dini_tilde`]) surface it here.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid probe grid: {0}")]
    InvalidProbe(String),

    #[error("trivial space: {direction} ({detail})")]
    TrivialSpace { direction: &'static str, detail: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("Dini violation: {0}")]
    DiniViolation(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("resolution error: {msg} (need N >= {required_n})")]
    Resolution { msg: String, required_n: usize },

    #[error("contract error: {0}")]
    Contract(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
