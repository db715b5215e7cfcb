use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    /// The reference matrix of a relative error has zero Frobenius norm.
    #[error("degenerate denominator: reference matrix has zero Frobenius norm")]
    DegenerateDenominator,

    #[error("oracle SVD limited to min(rows, cols) <= {limit}, got {actual}")]
    OracleLimit { limit: usize, actual: usize },

    /// Integer accumulation could exceed the 64-bit accumulator.
    #[error("accumulator overflow risk: k={k} with bit budgets {bits_a}/{bits_b}")]
    OverflowRisk { k: usize, bits_a: u32, bits_b: u32 },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    /// True for errors caused by caller input (bad shapes, parameters, files)
    /// rather than internal failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Shape(_)
                | Error::Parameter(_)
                | Error::OracleLimit { .. }
                | Error::OverflowRisk { .. }
                | Error::Parse { .. }
                | Error::DegenerateDenominator
                | Error::Format { .. }
        )
    }
}
