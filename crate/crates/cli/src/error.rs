//! CLI error taxonomy, mapped onto exit codes: parse and validation
//! failures exit 2, runtime failures (procedure errors, I/O) exit 3. One
//! machine-readable line goes to stderr either way.

use std::fmt;

#[derive(Debug)]
pub enum AppError {
    /// Malformed experiment file (syntax, types, unknown fields).
    Parse(String),
    /// Well-formed file violating a contract; carries the field path.
    Validation(String),
    /// Failure while executing a valid experiment.
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Parse(_) | AppError::Validation(_) => 2,
            AppError::Runtime(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Parse(_) => "parse",
            AppError::Validation(_) => "validation",
            AppError::Runtime(_) => "runtime",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            AppError::Parse(m) | AppError::Validation(m) | AppError::Runtime(m) => m,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kind={} msg={:?}", self.kind(), self.message())
    }
}

impl std::error::Error for AppError {}

impl From<biz::Error> for AppError {
    fn from(err: biz::Error) -> Self {
        match &err {
            biz::Error::InvalidMoments(_) | biz::Error::InvalidParameter(_) => {
                AppError::Validation(err.to_string())
            }
            _ => AppError::Runtime(err.to_string()),
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
