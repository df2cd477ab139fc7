use std::fmt;

use serde::Serialize;

/// Machine-readable code attached to every validation failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    RowSum,
    NegativeWeight,
    ZeroRow,
    DuplicateName,
    NonFinite,
    Empty,
    DimensionMismatch,
    NegativeValue,
    RaggedRows,
    Parse,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::RowSum => "ROW_SUM",
            ErrorCode::NegativeWeight => "NEGATIVE_WEIGHT",
            ErrorCode::ZeroRow => "ZERO_ROW",
            ErrorCode::DuplicateName => "DUPLICATE_NAME",
            ErrorCode::NonFinite => "NON_FINITE",
            ErrorCode::Empty => "EMPTY",
            ErrorCode::DimensionMismatch => "DIMENSION_MISMATCH",
            ErrorCode::NegativeValue => "NEGATIVE_VALUE",
            ErrorCode::RaggedRows => "RAGGED_ROWS",
            ErrorCode::Parse => "PARSE",
        }
    }

    /// Codes whose row/column point into a text file rather than a matrix.
    fn is_textual(self) -> bool {
        matches!(self, ErrorCode::Parse | ErrorCode::RaggedRows)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One violated rule. `row` and `column` are zero-based indices; for
/// text-level codes (`PARSE`, `RAGGED_ROWS`) they index lines and cells of
/// the input and are displayed one-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationError {
    pub code: ErrorCode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub detail: String,
}

impl ValidationError {
    pub fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        ValidationError {
            code,
            row: None,
            column: None,
            detail: detail.into(),
        }
    }

    pub fn at_row(mut self, row: usize) -> Self {
        self.row = Some(row);
        self
    }

    pub fn at_column(mut self, column: usize) -> Self {
        self.column = Some(column);
        self
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)?;
        let textual = self.code.is_textual();
        match (self.row, self.column) {
            (Some(r), Some(c)) if textual => write!(f, " at line {}, column {}", r + 1, c + 1)?,
            (Some(r), None) if textual => write!(f, " at line {}", r + 1)?,
            (Some(r), Some(c)) => write!(f, " at row {r}, column {c}")?,
            (Some(r), None) => write!(f, " at row {r}")?,
            (None, Some(c)) => write!(f, " at column {c}")?,
            (None, None) => {}
        }
        write!(f, ": {}", self.detail)
    }
}

/// Non-empty collection of validation failures.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl ValidationErrors {
    pub fn single(err: ValidationError) -> Self {
        ValidationErrors(vec![err])
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ValidationError> {
        self.0.iter()
    }

    pub fn has(&self, code: ErrorCode) -> bool {
        self.0.iter().any(|e| e.code == code)
    }

    pub fn codes(&self) -> Vec<ErrorCode> {
        self.0.iter().map(|e| e.code).collect()
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

impl From<ValidationError> for ValidationErrors {
    fn from(e: ValidationError) -> Self {
        ValidationErrors::single(e)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(#[from] ValidationErrors),

    #[error("{what} exceeds the configured limit of {limit}")]
    LimitExceeded { what: &'static str, limit: usize },

    #[error("option {option} does not exist (available: 1..={available})")]
    InvalidOption { option: usize, available: usize },

    #[error("session is finished, no further choices exist")]
    SessionFinished,

    #[error("stock source unreachable: {0}")]
    Unreachable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(errs) => match errs.0.as_slice() {
                [only] => only.code.as_str(),
                _ => "VALIDATION",
            },
            Error::LimitExceeded { .. } => "LIMIT_EXCEEDED",
            Error::InvalidOption { .. } => "INVALID_OPTION",
            Error::SessionFinished => "SESSION_FINISHED",
            Error::Unreachable(_) => "UNREACHABLE",
            Error::Io(_) => "IO",
        }
    }

    pub(crate) fn dimension(detail: impl Into<String>) -> Self {
        Error::Validation(ValidationError::new(ErrorCode::DimensionMismatch, detail).into())
    }
}

impl From<ValidationError> for Error {
    fn from(e: ValidationError) -> Self {
        Error::Validation(e.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
