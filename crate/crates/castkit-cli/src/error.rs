//! Exit-code-aware error carrier. Contract errors (bad arguments, bad
//! inputs, violated preconditions) exit 2; internal failures exit 1.

use std::fmt;

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONTRACT: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Contract(anyhow::Error),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Contract(_) => EXIT_CONTRACT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn inner(&self) -> &anyhow::Error {
        match self {
            CliError::Contract(e) | CliError::Internal(e) => e,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.inner())
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps an input-side failure (exit 2).
pub fn contract<E: Into<anyhow::Error>>(err: E) -> CliError {
    CliError::Contract(err.into())
}

/// Wraps an unexpected/output-side failure (exit 1).
pub fn internal<E: Into<anyhow::Error>>(err: E) -> CliError {
    CliError::Internal(err.into())
}

macro_rules! contract_bail {
    ($($arg:tt)*) => {
        return Err($crate::error::CliError::Contract(anyhow::anyhow!($($arg)*)))
    };
}

pub(crate) use contract_bail;
