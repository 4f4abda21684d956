use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate class distribution: need at least one positive and one negative example")]
    DegenerateClasses,

    #[error("non-finite score for example `{0}`")]
    NonFiniteScore(String),

    #[error("weight must be finite and > 0, got {weight} for example `{example_id}`")]
    InvalidWeight { example_id: String, weight: f64 },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid operating conditions: {0}")]
    InvalidConditions(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("missing score for classifier `{0}`")]
    MissingScore(String),

    #[error("invalid hull: {0}")]
    InvalidHull(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: f64) -> Self {
        Error::OutOfRange { what, value }
    }
}
