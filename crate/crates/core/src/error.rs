use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A factorization pivot was not strictly positive.
    #[error("matrix is not positive definite (pivot {pivot} <= 0)")]
    NotPositiveDefinite { pivot: usize },

    #[error("cannot fit a surrogate on an empty dataset")]
    EmptyDataset,

    #[error("dataset contains a non-finite value at index {index}")]
    NonFiniteObservation { index: usize },

    #[error("measurement budget {budget} is smaller than the OMP sparsity {sparsity}")]
    BudgetTooSmall { budget: usize, sparsity: usize },

    #[error("measurement budget {budget} exceeds the {grid} available codebook pairs")]
    BudgetExceedsGrid { budget: usize, grid: usize },

    #[error("exhaustive-search spectral efficiency is {value}; the normalization is undefined")]
    DegenerateBaseline { value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("trial {trial} ({method}): {source}")]
    Trial {
        trial: usize,
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
