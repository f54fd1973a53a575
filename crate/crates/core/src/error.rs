//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A planted-vector specification violates its preconditions
    /// (e.g. `s > d` or a nonpositive target norm).
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A constraint or estimator parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A ball-type constraint was anchored at the zero vector.
    #[error("zero vector: {0}")]
    ZeroVector(String),

    /// Labels do not regenerate from the claimed planted vector.
    #[error("dataset is not realizable: label {index} does not regenerate from w*")]
    NotRealizable { index: usize },

    /// The solver produced a NaN/Inf entry; `iteration` is the first bad step.
    #[error("non-finite iterate at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    /// A contraction measurement was requested on a trace with fewer than
    /// two error entries above the stopping threshold.
    #[error("insufficient trace: {0}")]
    InsufficientTrace(String),

    /// The requested cone has no Monte Carlo polar-distance rule; callers
    /// should use the documented fallbacks in `geometry::minimal_samples`.
    #[error("unsupported cone: {0}")]
    UnsupportedCone(String),

    #[error("line search did not converge within {0} iterations")]
    NonconvergentLineSearch(usize),

    /// A concentration check was invoked below its own sampling condition.
    #[error("sampling condition unmet: {0}")]
    SamplingConditionUnmet(String),

    #[error("nonpositive argument: {0}")]
    NonpositiveArgument(String),

    /// Configuration-file or CLI-argument problems, with field diagnostics.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for numerical divergence, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::NonFiniteIterate { .. } => 3,
            Error::Config(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::InvalidParameter(_)
            | Error::InvalidSpec(_)
            | Error::ZeroVector(_)
            | Error::SamplingConditionUnmet(_) => 2,
            _ => 1,
        }
    }
}
