use crate::rational::Rational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error{}: {message}", location(*row, *col))]
    Parse {
        message: String,
        row: Option<usize>,
        col: Option<usize>,
    },
    #[error("row {row} does not sum to 1 (deficit {deficit})")]
    RowSum { row: usize, deficit: Rational },
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry {
        row: usize,
        col: usize,
        value: Rational,
    },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("quantum model: {0}")]
    Model(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

fn location(row: Option<usize>, col: Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        _ => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
