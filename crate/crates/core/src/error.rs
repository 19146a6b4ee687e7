//! Error type shared across the toolkit.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: u64 },

    #[error("empty vocabulary")]
    EmptyVocab,

    #[error("empty input")]
    EmptyInput,

    #[error("sample size {requested} exceeds available line count {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("line counts differ: {left} vs {right}")]
    LineCountMismatch { left: usize, right: usize },

    #[error("parallel files are misaligned: {source_lines} source lines vs {target_lines} target lines")]
    AlignmentMismatch {
        source_lines: usize,
        target_lines: usize,
    },

    #[error("duplicate score name {name:?}")]
    DuplicateScore { name: String },

    #[error("missing score {name:?} on hypothesis for sentence {sentence_id}")]
    MissingScore { name: String, sentence_id: u64 },

    #[error("probability {value} is outside [0, 1]")]
    InvalidProbability { value: f64 },

    #[error("{path}: {message} (line {line})")]
    FileFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Format error for in-memory parsing, without a file path.
    pub fn format(message: impl Into<String>) -> Self {
        Error::Format(message.into())
    }

    /// Attach a file path to an io error.
    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
