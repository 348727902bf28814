use std::fmt;

use crate::gauss::Underlying;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Syntax or consistency error in a Gauss code, with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    /// A label that does not occur exactly twice.
    LabelCount { label: u32, count: usize },
    /// Both occurrences of a label are `O`, both `U`, or arrow and chord tokens are mixed.
    OverUnderMismatch { label: u32 },
    SignMismatch { label: u32 },
    ComponentCount { expected: usize, found: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at byte {}: {msg}", self.position),
            ParseErrorKind::LabelCount { label, count } => write!(
                f,
                "label {label} occurs {count} time(s), expected exactly 2 (byte {})",
                self.position
            ),
            ParseErrorKind::OverUnderMismatch { label } => write!(
                f,
                "label {label} needs one O and one U token, or one Da and one Db token (byte {})",
                self.position
            ),
            ParseErrorKind::SignMismatch { label } => {
                write!(f, "label {label} has inconsistent signs (byte {})", self.position)
            }
            ParseErrorKind::ComponentCount { expected, found } => write!(
                f,
                "header declares {expected} component(s) but {found} were given (byte {})",
                self.position
            ),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("operation requires {expected} diagram, got {found}")]
    WrongKind { expected: &'static str, found: Underlying },
    #[error("operation requires a chord-free diagram")]
    ChordsPresent,
    #[error("inconsistent diagram: {0}")]
    Invalid(String),
    #[error("move site no longer matches the diagram")]
    StaleSite,
    #[error("slot collision or out-of-range slot: {0}")]
    SlotCollision(String),
    #[error("index out of range: {0}")]
    BadIndex(String),
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("step limit of {0} reached before a fixpoint")]
    StepLimit(usize),
    #[error("cache file error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn wrong_kind(expected: &'static str, found: Underlying) -> Self {
        Error::WrongKind { expected, found }
    }
}
