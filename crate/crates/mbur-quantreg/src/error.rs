//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the statistical routines and data handling.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix was singular within the pivot tolerance.
    #[error("singular matrix: pivot in column {column} below tolerance")]
    Singular { column: usize },

    /// An objective or derivative probe returned a non-finite value.
    #[error("non-finite evaluation at {coords:?}")]
    Eval { coords: Vec<f64> },

    /// `exp(phi)` overflowed while mapping a linear predictor to a shape.
    #[error("linear predictor {phi} overflows exp()")]
    Overflow { phi: f64 },

    /// A cell could not be parsed. Coordinates are 1-based and count the
    /// header row and label column.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// A requested column does not exist in the table.
    #[error("unknown column: {0}")]
    UnknownColumn(String),

    /// Two rows share a label.
    #[error("duplicate row label: {0}")]
    DuplicateLabel(String),

    /// Too few complete observations for the requested model.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 3 for data problems, 4 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::UnknownColumn(_)
            | Error::DuplicateLabel(_)
            | Error::InsufficientData(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Domain(_) => 3,
            Error::Singular { .. } | Error::Eval { .. } | Error::Overflow { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
