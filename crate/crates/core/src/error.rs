use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} basis functions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("subdomain is not contained in the model domain")]
    OmegaOutsideDomain,

    #[error("point {index} lies outside the model domain")]
    PointOutsideDomain { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix of size {size} is not positive definite after jitter escalation")]
    NotPositiveDefinite { size: usize },

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("exhaustive search over {count} subsets exceeds the budget of {budget}")]
    CombinatorialBudget { count: u128, budget: u128 },

    #[error("L = {num_bfs} needs about {required_mb} MiB, over the {budget_mb} MiB budget")]
    MemoryBudget {
        num_bfs: usize,
        required_mb: u64,
        budget_mb: u64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
