use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the active-learning engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot stratify {seed_count} seed labels over {classes} classes")]
    StratificationInfeasible { seed_count: usize, classes: usize },

    #[error("instance {0} is already oracle-labeled")]
    DoubleLabel(usize),

    #[error("instance {0} not found in the pool")]
    NotFound(usize),

    #[error("instance {0} is labeled and cannot receive a pseudo-label")]
    Conflict(usize),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("non-finite input value")]
    NonFinite,

    #[error("invalid probability vector: {0}")]
    InvalidProbs(String),

    #[error("batch has zero total weight")]
    DegenerateBatch,

    #[error("training set needs at least two distinct labels")]
    DegenerateTraining,

    #[error("uncertainty measure undefined for {0} class(es)")]
    UndefinedMeasure(usize),

    #[error("density undefined on an empty pool")]
    UndefinedDensity,

    #[error("oracle budget exhausted: requested {requested}, remaining {remaining}")]
    BudgetExhausted { requested: u64, remaining: u64 },

    #[error("unlabeled pool is exhausted")]
    PoolExhausted,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("synthetic generation failed: {0}")]
    Generation(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
