use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("outcome counts are empty")]
    EmptyCounts,

    #[error("empty dataset")]
    EmptyData,

    #[error("R² undefined: all targets are identical")]
    ConstantTargets,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("word not in vocabulary: {0}")]
    OutOfVocabulary(String),

    #[error("zero vector has no cosine distance")]
    ZeroVector,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("no legal clue candidate")]
    NoCandidate,

    #[error("unknown expert id {0}")]
    UnknownExpert(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("result matrix incomplete, missing pairs: {0}")]
    IncompleteMatrix(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
