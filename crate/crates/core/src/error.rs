use thiserror::Error;

/// Errors raised by construction, decoding and the brute-force oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("selected submatrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("no locator of degree <= {max_degree} annihilates the syndromes (best residual {best_residual:e})")]
    InconsistentSyndromes { max_degree: usize, best_residual: f64 },

    #[error("locator roots not separated: {0}")]
    RootSeparationFailure(String),

    #[error("decoding failed: {0}")]
    DecodingFailure(String),

    #[error("enumeration of {requested} cases exceeds the cap of {cap}")]
    EnumerationCapExceeded { requested: u128, cap: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
