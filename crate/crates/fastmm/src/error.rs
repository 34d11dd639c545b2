//! Error types shared by every module of the crate.

use thiserror::Error;

/// The specific way in which an SMS text failed to parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmsErrorKind {
    /// The first non-comment line is not `<rows> <cols> M`.
    MalformedHeader(String),
    /// An entry line does not consist of `<i> <j> <value>`.
    MalformedEntry(String),
    /// The value field is neither an integer, a reduced fraction nor (in
    /// decimal mode) a float.
    BadValue(String),
    /// A 1-based index lies outside the declared dimensions.
    IndexOutOfRange { i: usize, j: usize },
    /// The same position was listed twice.
    DuplicateEntry { i: usize, j: usize },
    /// The input ended before the `0 0 0` terminator.
    MissingTerminator,
}

impl std::fmt::Display for SmsErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SmsErrorKind::MalformedHeader(s) => write!(f, "malformed header {s:?}"),
            SmsErrorKind::MalformedEntry(s) => write!(f, "malformed entry {s:?}"),
            SmsErrorKind::BadValue(s) => write!(f, "bad value {s:?}"),
            SmsErrorKind::IndexOutOfRange { i, j } => write!(f, "index out of range ({i}, {j})"),
            SmsErrorKind::DuplicateEntry { i, j } => write!(f, "duplicate entry ({i}, {j})"),
            SmsErrorKind::MissingTerminator => write!(f, "missing \"0 0 0\" terminator"),
        }
    }
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// SMS text could not be parsed.
    #[error("SMS parse error at line {line}: {kind}")]
    Sms { line: usize, kind: SmsErrorKind },
    /// A coefficient literal could not be parsed.
    #[error("cannot parse coefficient {0:?}")]
    Coefficient(String),
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A matrix that must be invertible is singular.
    #[error("singular matrix: {0}")]
    Singular(String),
    /// An irrational entry cannot be written in the exact SMS dialect.
    #[error("entry {0} is not rational; enable decimal export to write it")]
    SurdEntry(String),
    /// A scheme does not satisfy a precondition of the requested analysis.
    #[error("non-conforming scheme: {0}")]
    NonConforming(String),
    /// An operation requiring exact coefficients received a float-backed scheme.
    #[error("exact coefficients required: {0}")]
    NotExact(String),
    /// A program contains an instruction the requested pass cannot handle.
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    /// A user-supplied parameter is outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Underlying I/O failure (loading external schemes, writing CSV).
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
