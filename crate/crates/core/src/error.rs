use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing required file {0}")]
    MissingFile(PathBuf),

    #[error("{file}:{line}: {reason}")]
    MalformedRow {
        file: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("no recordings found under {0}")]
    EmptyDataset(PathBuf),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid activity code {0:?}")]
    InvalidActivity(String),

    #[error("recordings cannot be paired: {0}")]
    UnpairedRecordings(String),

    #[error("series length {0} is too short for a spectrum (need at least 2)")]
    LengthError(usize),

    #[error("segments have heterogeneous lengths ({0} vs {1})")]
    HeterogeneousLength(usize, usize),

    #[error("need at least {needed} examples to split, got {got}")]
    TooFewExamples { needed: usize, got: usize },

    #[error("input of length {length} underflows at conv block {block}")]
    ShapeUnderflow { block: usize, length: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("loss became non-finite in epoch {epoch} (last finite epoch: {last_finite_epoch:?})")]
    NonFiniteLoss {
        epoch: usize,
        last_finite_epoch: Option<usize>,
    },

    #[error("hyperparameter {name} = {value} outside its search range")]
    InvalidConfig { name: &'static str, value: f64 },

    #[error("label and prediction lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("cannot build a confusion matrix from zero predictions")]
    Empty,

    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),

    #[error("stream evaluation needs ground-truth fall onsets")]
    NoGroundTruth,

    #[error("trial budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("bad file format in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("invalid experiment configuration: {0}")]
    Config(String),

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

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
