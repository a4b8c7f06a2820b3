use thiserror::Error;

/// Errors surfaced by the kernel and the CLI.
///
/// The CLI maps these to exit codes: unsupported input -> 2, precision
/// exhaustion / truncation too short -> 3, theorem violation -> 4,
/// everything else -> 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("precision exhausted: {msg} (increase working precision to at least p^{needed})")]
    Precision { msg: String, needed: u32 },

    #[error("series truncation too short: {msg} (increase K to at least {needed})")]
    IncreaseK { msg: String, needed: usize },

    #[error("THEOREM VIOLATION: {0}")]
    TheoremViolation(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unsupported(_) | Error::Invalid(_) => 2,
            Error::Precision { .. } | Error::IncreaseK { .. } => 3,
            Error::TheoremViolation(_) => 4,
            Error::Internal(_) | Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
