use thiserror::Error;

pub type Result<T, E = LvrError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LvrError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid block-time law: {0}")]
    InvalidLaw(String),

    #[error("empirical block-time table is empty")]
    EmptyTable,

    /// A single excursion (or ladder passage) ran past the configured cap.
    #[error("iteration cap of {cap} steps exceeded while {phase}")]
    IterationCapExceeded { cap: u64, phase: &'static str },

    #[error("accumulator holds {count} samples, at least {needed} required")]
    InsufficientSamples { count: u64, needed: u64 },

    #[error("accumulators were built for different parameter sets")]
    ParameterMismatch,

    #[error("denominator rho_b + r1 + o1 is not positive ({0})")]
    ZeroDenominator(f64),

    #[error("C_mu must be nonnegative, got {0}")]
    NegativeCMu(f64),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LvrError {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        LvrError::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
