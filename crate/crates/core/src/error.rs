use thiserror::Error;

/// Errors raised by planning, evaluation and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("enumeration of {count} candidates exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("inclusion-exclusion over {size} rectangles exceeds cap {cap}")]
    ObjectiveTooLarge { size: usize, cap: usize },

    #[error("attack rate is undefined when f(S) = 0")]
    UndefinedRate,

    #[error("objective is degenerate: every singleton value is zero")]
    DegenerateObjective,

    #[error("invalid spec field `{field}`: {reason}")]
    Usage { field: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn usage(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Usage {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
