use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single reason a candidate matrix is not in `M_{n,d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Row `row` has `len` entries instead of `n`.
    NotSquare { row: usize, len: usize },
    BadEntry { row: usize, col: usize, value: u8 },
    RowSum { row: usize, sum: usize },
    ColumnSum { col: usize, sum: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, len } => write!(f, "row {row} has length {len}"),
            Violation::BadEntry { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} is not 0 or 1")
            }
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
            Violation::ColumnSum { col, sum } => write!(f, "column {col} sums to {sum}"),
        }
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a {n}x{n} matrix with row/column sums {d}: {}", join(.violations))]
    Validation {
        n: usize,
        d: usize,
        violations: Vec<Violation>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} exceeds budget of {limit}")]
    BudgetExceeded { what: &'static str, limit: u64 },
    #[error("no convergence within {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::InvalidArgument(_) | Error::Parse { .. }
        )
    }
}
