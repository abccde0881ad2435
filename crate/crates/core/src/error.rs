use thiserror::Error;

/// Errors raised by parameter validation and the pure model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("index out of range: {what} = {index}, expected < {bound}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("rotation indices must differ and satisfy j < k (got j = {j}, k = {k})")]
    BadPair { j: usize, k: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("state has zero energy and cannot be projected onto the sphere")]
    ZeroState,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
