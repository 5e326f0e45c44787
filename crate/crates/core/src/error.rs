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
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("confidence value {value} out of range at index {index}")]
    ValueOutOfRange { index: usize, value: f32 },
    #[error("image decode failed for {path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("ground truth: {0}")]
    GroundTruth(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("lane output: {0}")]
    LaneOutput(String),
    #[error("frame alignment: {0}")]
    FrameMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fit degenerate: {0}")]
    FitDegenerate(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
