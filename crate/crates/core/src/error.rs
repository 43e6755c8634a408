use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file} line {line}: {message}")]
    Malformed {
        file: String,
        line: u64,
        message: String,
    },

    #[error("{file} line {line}: duplicate movie id {id}")]
    DuplicateMovie { file: String, line: u64, id: u32 },

    #[error("{file} line {line}: unknown movie id {id}")]
    UnknownMovie { file: String, line: u64, id: u32 },

    #[error("{file} line {line}: user {user} already rated movie {movie}")]
    DuplicateRating {
        file: String,
        line: u64,
        user: u32,
        movie: u32,
    },

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("training corpus line {line}: Unknown is a fallback, not a trainable label")]
    UnknownLabelInCorpus { line: usize },

    #[error("model file: {0}")]
    Model(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
