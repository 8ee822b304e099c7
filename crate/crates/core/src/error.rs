use std::path::PathBuf;

/// Errors produced by the clustering pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: row {row}: {msg}")]
    Parse { path: PathBuf, row: usize, msg: String },

    #[error("row {row}, column {col}: non-finite value")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("index ({i}, {j}) out of range for {n} objects")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("weak learnability violated: q = {0} must lie in (0.5, 1]")]
    WeakLearnability(f64),

    #[error("degenerate training set: all targets are {0}")]
    DegenerateTraining(u8),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
