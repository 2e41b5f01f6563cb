use thiserror::Error;

use crate::matkit::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("dimension mismatch in `{key}`: expected {expected}, found {found}")]
    DimensionMismatch {
        key: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite entry in `{key}`")]
    NonFiniteEntry { key: &'static str },

    #[error("duplicate coordinate label {0:?}")]
    DuplicateLabel(String),

    #[error("coordinate {m} out of range 1..={p}")]
    BadCoordinate { m: usize, p: usize },

    #[error("unknown coordinate label {0:?}")]
    UnknownLabel(String),

    #[error(
        "intervention {stage} ({label}): reduced mean reversion speed is singular"
    )]
    SingularReducedMatrix { stage: usize, label: String },

    #[error("coordinate {label} is intervened on more than once")]
    DuplicateIntervention { label: String },

    #[error("no stationary distribution: {0}")]
    NoStationaryDistribution(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("{requested} submatrices requested, budget is {budget}")]
    TooLarge { requested: u128, budget: u128 },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("time grid is not strictly increasing from 0 at index {index}")]
    NonPositiveSteps { index: usize },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
