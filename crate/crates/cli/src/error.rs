use lvr_core::LvrError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] LvrError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("rendering chart: {0}")]
    Chart(String),
}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                LvrError::InvalidParameter { .. }
                | LvrError::InvalidLaw(_)
                | LvrError::EmptyTable
                | LvrError::InvalidConfig(_)
                | LvrError::NegativeCMu(_)
                | LvrError::ZeroDenominator(_) => EXIT_USAGE,
                LvrError::IterationCapExceeded { .. }
                | LvrError::InsufficientSamples { .. }
                | LvrError::ParameterMismatch
                | LvrError::Io(_) => EXIT_RUNTIME,
            },
            CliError::Io { .. } | CliError::Chart(_) => EXIT_RUNTIME,
        }
    }
}
