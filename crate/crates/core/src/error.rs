//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidField(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported prime {p}: {reason}")]
    UnsupportedPrime { p: u64, reason: String },
    #[error("valuation of zero is undefined")]
    UndefinedValuation,
    #[error("numeric failure: {message} (achieved error bound {achieved:e})")]
    Numeric { message: String, achieved: f64 },
    #[error("regularization unavailable: {0}")]
    RegularizationUnavailable(String),
    #[error("bad window: {0}")]
    BadWindow(String),
    #[error("not a kernel: {0}")]
    NotAKernel(String),
    #[error("no witness: smooth norm {smooth_norm} exceeds {bound}")]
    NoWitness { smooth_norm: f64, bound: f64 },
    #[error("partial set: found {} of {wanted} ({detail})", found.len())]
    PartialSet {
        wanted: usize,
        found: Vec<Vec<i64>>,
        detail: String,
    },
    #[error("not a graph: {0}")]
    NotAGraph(String),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("identity violated at {witness}")]
    IdentityViolation { witness: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse grouping of errors, used by the command-line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input that could not be parsed.
    Input,
    /// A documented precondition does not hold.
    Precondition,
    /// The request is outside the supported cases.
    Unsupported,
    /// A numeric tolerance could not be met.
    Numeric,
    /// Reading or writing a file failed.
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_) | Error::InvalidField(_) => ErrorClass::Input,
            Error::UnsupportedPrime { .. }
            | Error::UnsupportedCase(_)
            | Error::RegularizationUnavailable(_) => ErrorClass::Unsupported,
            Error::Numeric { .. } => ErrorClass::Numeric,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
