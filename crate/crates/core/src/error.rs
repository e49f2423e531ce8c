//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty answer has no confidence")]
    EmptyLogprobs,

    #[error("no extractable answers")]
    NoExtractableAnswers,

    #[error("shannon entropy needs a positive sample total")]
    ZeroTotal,

    #[error("category counts sum to {got}, expected {expected}")]
    CountMismatch { got: usize, expected: usize },

    #[error("window size must be at least 1")]
    ZeroWindow,

    #[error("entropy range degenerate: M must be at least 2, got {0}")]
    DegenerateEntropyRange(usize),

    #[error("threshold fractions must satisfy 0 < tau1 < tau2 < 1, got ({tau1}, {tau2})")]
    BadThresholdFractions { tau1: f64, tau2: f64 },

    #[error("entropy must be nonnegative, got {0}")]
    NegativeEntropy(f64),

    #[error("sampling budget N must be at least 1")]
    ZeroBudget,

    #[error("invalid strategy config: {0}")]
    InvalidConfig(String),

    #[error("invalid extraction pattern: {0}")]
    BadPattern(#[from] regex::Error),

    #[error("unknown problem id {0:?}")]
    UnknownProblem(String),

    #[error("invalid generation request: {0}")]
    InvalidRequest(String),

    #[error("backend request failed after {attempts} attempt(s): {message}")]
    Backend { attempts: u32, message: String },

    #[error("dataset error at {path}:{line}: {message}")]
    Dataset {
        path: String,
        line: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate problem id {0:?}")]
    DuplicateId(String),

    #[error("simulation profiles missing for problem ids: {0}")]
    MissingProfiles(String),

    #[error("invalid profile for {id:?}: {message}")]
    BadProfile { id: String, message: String },

    #[error("report output error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
