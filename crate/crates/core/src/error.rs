use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum HarError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid sequence (participant {participant}, activity {activity}): {violations}")]
    InvalidSequence {
        participant: u32,
        activity: u8,
        violations: String,
    },

    #[error("sequence too short: {frames} frames, at least {required} required")]
    SequenceTooShort { frames: usize, required: usize },

    #[error("zero head-neck distance in frame {frame}")]
    DegenerateReference { frame: u64 },

    #[error("invalid label {0}: expected 1..=9")]
    InvalidLabel(i64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no variance to explain")]
    NoVariance,

    #[error("training data needs at least two distinct labels")]
    SingleClass,

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot partition: {0}")]
    Partition(String),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarError>;

impl HarError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarError::Io {
            path: path.into(),
            source,
        }
    }
}
