use thiserror::Error;

/// Errors raised while building instances, evaluating costs or solving.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero distance under log cost")]
    ZeroDistanceLog,

    #[error("negative distance {0} passed to the cost function")]
    NegativeDistance(f64),

    #[error("cost function returned a non-finite value at x = {0}")]
    NonFiniteCost(f64),

    #[error("power exponent {0} must lie in (0, 1]")]
    InvalidExponent(f64),

    #[error("position {0} is not finite")]
    NonFinitePosition(f64),

    #[error("duplicate position {0}")]
    DuplicatePosition(f64),

    #[error("duplicate {role} id {id}")]
    DuplicateId { role: &'static str, id: usize },

    #[error("instance has {demand} demand and {supply} supply points")]
    Unbalanced { demand: usize, supply: usize },

    #[error("instance is empty")]
    EmptyInstance,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("indicator index out of range: k = {k}, i = {i}, chain size {n}")]
    IndexOutOfRange { k: usize, i: usize, n: usize },

    #[error("reduction conflict: {0}")]
    ReductionConflict(String),

    #[error("instance of {n} pairs exceeds the {limit}-pair limit of this oracle")]
    TooLarge { n: usize, limit: usize },

    #[error("non-positive count {0} cannot be fitted on a log scale")]
    NonPositiveCount(f64),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid cost specification `{0}`")]
    InvalidCostSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors that indicate a broken solver invariant rather than bad input.
    pub fn is_integrity(&self) -> bool {
        matches!(self, Error::ReductionConflict(_))
    }
}
