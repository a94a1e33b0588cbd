use thiserror::Error;

use crate::mlmc::MlmcResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate spectral scale: d_max = {0}; supply beta explicitly")]
    DegenerateScale(f64),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("matrix too large for the dense oracle: n = {n} exceeds {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("MLMC did not converge within the level cap (L = {})", .0.max_level)]
    NotConverged(Box<MlmcResult>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
