use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("aged initial sampling rejected {attempts} consecutive draws")]
    RejectionLimit { attempts: usize },

    #[error("event count exceeded {limit}; the configuration is running away")]
    EventOverflow { limit: usize },

    #[error("fixed-point iteration did not converge at step {step}")]
    NoConvergence { step: usize },

    #[error("invariant `{what}` violated at grid index {index} (value {value})")]
    InvariantViolation {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("covariance matrix not positive definite after jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("singular per-step system at step {step}")]
    SingularStep { step: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
