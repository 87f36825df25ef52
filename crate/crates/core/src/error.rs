use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid class spec: {0}")]
    InvalidSpec(String),

    #[error("bitstring has length {got}, instance has {expected} variables")]
    BitstringLength { expected: usize, got: usize },

    #[error("cost {cost} lies outside the cost set 0..={max}")]
    CostOutOfRange { cost: usize, max: usize },

    #[error("Hamming distance {d} outside 0..={n}")]
    DistanceOutOfRange { d: usize, n: usize },

    #[error("n = {n} exceeds the exhaustive limit of {limit} variables")]
    SizeLimit { n: usize, limit: usize },

    #[error("cost {0} has zero probability under the class distribution")]
    CostUnreachable(usize),

    #[error("no bitstring with cost {0} in any instance of the cohort")]
    EmptyCohort(usize),

    #[error("correlation undefined for constant input")]
    UndefinedCorrelation,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("state was produced from a different distribution table")]
    TableMismatch,

    #[error("pseudo-norm is zero, cannot normalize")]
    ZeroNorm,

    #[error("approximation ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("parameter vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective is not finite at {0}")]
    NonFinite(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid optimizer options: {0}")]
    InvalidOptions(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures that come from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroNorm
                | Error::NonFinite(_)
                | Error::UndefinedCorrelation
                | Error::UndefinedRatio(_)
                | Error::CostUnreachable(_)
        )
    }
}
