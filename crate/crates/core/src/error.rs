//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by instance construction, solvers, checkers, and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("instance has {got} points, exceeding the cap of {cap}")]
    TooManyPoints { got: usize, cap: usize },

    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },

    #[error("matrix is not square: row {row} has length {len}, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("matrix entry ({i},{j}) = {value} is invalid: {reason}")]
    BadMatrixEntry {
        i: usize,
        j: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("an explicit-matrix instance cannot be derived from points")]
    ExplicitFromPoints,

    #[error("steiner centers require coordinates and a squared-euclidean source: {0}")]
    SteinerUnsupported(&'static str),

    #[error("perturbation operators require data-point centers (steiner instances lose their coordinate backing)")]
    PerturbSteiner,

    #[error("member set is empty")]
    EmptyMembers,

    #[error("member sets overlap at point {0}")]
    OverlappingSets(usize),

    #[error("point index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("alpha must be >= 1, got {0}")]
    BadAlpha(f64),

    #[error("k = {k} out of range for n = {n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("this operation needs k >= {min}, got k = {k}")]
    KTooSmall { k: usize, min: usize },

    #[error("label vector has length {got}, expected {expected}")]
    LabelLengthMismatch { got: usize, expected: usize },

    #[error("cluster id {id} is empty (labels must use every id in [0, k))")]
    EmptyCluster { id: usize },

    #[error("weights rejected: {0}")]
    WeightsUnsupported(&'static str),

    #[error("weights length {got} does not match cluster count {expected}")]
    WeightsLengthMismatch { got: usize, expected: usize },

    #[error("enumeration budget exceeded: need {required} {unit}, budget is {budget} ({hint})")]
    BudgetExceeded {
        required: u128,
        budget: u128,
        unit: &'static str,
        hint: &'static str,
    },

    #[error("invalid generator parameter: {0}")]
    BadGeneratorParam(String),

    #[error("generator post-check failed after {attempts} attempts: {reason}")]
    GeneratorPostCheck { attempts: usize, reason: String },

    #[error("clustering is inconsistent with the instance: {0}")]
    InvalidClustering(String),
}

/// Shorthand result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by exceeding an enumeration budget rather than
    /// by invalid input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
