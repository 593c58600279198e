use thiserror::Error;

use crate::access::IndexSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurError {
    #[error("matrix data has length {len}, expected {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    SvdNoConvergence { rows: usize, cols: usize },

    #[error("matrix is not SPSD: residual pivot {pivot:e} at index {index}")]
    NotSpsd { index: usize, pivot: f64 },

    #[error("generator volume is zero; restart from GECP with a larger generator size")]
    ZeroVolume,

    #[error("generator is singular; use a generator larger than the target rank")]
    SingularGenerator,

    #[error("index update budget of {limit} exhausted")]
    UpdateBudgetExhausted { limit: usize, best: IndexSet },

    #[error("strip has zero r-projective volume (rank below {rank})")]
    DegenerateStrip { rank: usize },

    #[error("numerical rank {found} does not match requested rank {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("enumeration of {candidates} candidates exceeds the guard of {limit}")]
    EnumerationGuard { candidates: u128, limit: u128 },

    #[error("dense assembly of order {n} refused (limit {limit})")]
    DenseTooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, CurError>;
