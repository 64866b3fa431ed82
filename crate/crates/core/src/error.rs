use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("map is empty")]
    EmptyMap,

    #[error("map line {line} has width {found}, expected {expected}")]
    NonRectangular {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown map character {ch:?} at line {line}, column {column}")]
    UnknownCharacter { ch: char, line: usize, column: usize },

    #[error("free cells are not connected: cell ({row}, {col}) is unreachable from ({from_row}, {from_col})")]
    Disconnected {
        row: usize,
        col: usize,
        from_row: usize,
        from_col: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no feasible matching saturates the smaller side; unmatched rows {unmatched_rows:?}")]
    InfeasibleMatching { unmatched_rows: Vec<usize> },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
