use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} needs {needed} units of work, budget is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: gave up after {attempts} attempts")]
    RetriesExhausted { what: &'static str, attempts: u64 },

    #[error("empty fiber: no support point maps to the requested value")]
    EmptyFiber,

    #[error("the variety is empty")]
    EmptyVariety,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn budget(what: &'static str, needed: u128, limit: u128) -> Self {
        Error::BudgetExceeded {
            what,
            needed,
            limit,
        }
    }
}

/// Fails with [`Error::BudgetExceeded`] when `needed > limit`.
pub(crate) fn check_budget(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::budget(what, needed, limit))
    } else {
        Ok(())
    }
}
