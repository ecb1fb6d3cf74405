use std::path::PathBuf;

use dcq_core::DcqError;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unknown relation `{name}`")]
    UnknownRelation {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: unknown query `{name}`")]
    UnknownQuery {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: `{name}` is declared twice")]
    Duplicate {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: relation `{relation}` has {expected} columns, atom has {found}")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("difference `{dcq}`: operand heads differ ({detail})")]
    HeadMismatch { dcq: String, detail: String },
    #[error("`{name}`: {source}")]
    Invalid { name: String, source: DcqError },
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    HeaderMismatch {
        path: PathBuf,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("{path}:{line}: {message}")]
    BadValue {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: count must be positive")]
    NonPositiveCount { path: PathBuf, line: u64 },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("cannot sample from an empty graph")]
    EmptyGraph,
    #[error("rule probabilities must be non-negative and sum to 1, got {0:?}")]
    InvalidMix((f64, f64, f64)),
    #[error("no path of length {0} found after repeated sampling")]
    NoPath(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SqlError {
    #[error("no SQL form for the `{0}` strategy")]
    UnsupportedPlanForSql(String),
    #[error("relation `{0}` is not declared")]
    UnknownRelation(String),
    #[error(transparent)]
    Dcq(#[from] DcqError),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Dcq(#[from] DcqError),
    #[error(
        "`{dcq}`: {strategy} returned {got} tuples, oracle {expected}; first difference {witness}"
    )]
    OracleMismatch {
        dcq: String,
        strategy: String,
        got: usize,
        expected: usize,
        witness: String,
    },
    #[error("{0}")]
    Unsupported(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
