use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Computation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("cannot parse cell at row {row}, column {column} ({name}): {value:?}")]
    BadCell {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("label column {0} not found")]
    MissingLabelColumn(String),
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("dataset has no samples")]
    Empty,
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("imbalance undefined for a single label")]
    SingleLabel,
    #[error("unknown similarity {0:?}; expected one of chebyshev, cityblock, euclidean, cosine, correlation")]
    UnknownSimilarity(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero-norm vector{} under cosine distance", fmt_sample(.sample))]
    ZeroNorm { sample: Option<usize> },
    #[error("constant vector{} under correlation distance", fmt_sample(.sample))]
    ConstantVector { sample: Option<usize> },
    #[error("invalid fold count k={k} for {n} samples (need 2 <= k <= n)")]
    FoldCount { k: usize, n: usize },
    #[error("empty candidate set")]
    NoCandidates,
    #[error("group of {requested} requested but only {available} candidates remain")]
    GroupTooLarge { requested: usize, available: usize },
    #[error("invalid fold assignment: {0}")]
    InvalidFolds(String),
    #[error("fold {0} is empty")]
    EmptyFold(usize),
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("n_neighbors={n_neighbors} exceeds training set size {train_size}")]
    TooManyNeighbors {
        n_neighbors: usize,
        train_size: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incomparable reports: {0}")]
    Incomparable(String),
    #[error("malformed distance matrix file: {0}")]
    MatrixFormat(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_sample(sample: &Option<usize>) -> String {
    match sample {
        Some(i) => format!(" at sample {i}"),
        None => String::new(),
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnknownSimilarity(_) | Error::InvalidArgument(_) => ErrorClass::Usage,
            Error::ZeroNorm { .. }
            | Error::ConstantVector { .. }
            | Error::DimensionMismatch { .. }
            | Error::NoCandidates
            | Error::GroupTooLarge { .. } => ErrorClass::Computation,
            _ => ErrorClass::Data,
        }
    }

    /// Attach a sample index to a per-vector distance error.
    pub(crate) fn at_sample(self, i: usize) -> Self {
        match self {
            Error::ZeroNorm { .. } => Error::ZeroNorm { sample: Some(i) },
            Error::ConstantVector { .. } => Error::ConstantVector { sample: Some(i) },
            other => other,
        }
    }
}
