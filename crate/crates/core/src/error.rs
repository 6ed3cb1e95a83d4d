use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimension { rows: usize, cols: usize },

    #[error("expected {expected} entries, found {found}")]
    DataLength { expected: usize, found: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },

    #[error("requested rank {k} outside 1..={max}")]
    InvalidRank { k: usize, max: usize },

    #[error("min dimension {dim} exceeds the full-SVD limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("invalid constants: {0}")]
    InvalidConstants(&'static str),

    #[error("invalid regularizer: {0}")]
    InvalidRegularizer(&'static str),

    #[error("starting point is infeasible for {0}")]
    InfeasibleStart(&'static str),

    #[error("degenerate instance: {0}")]
    DegenerateInstance(&'static str),

    #[error("unsupported configuration: {0}")]
    Unsupported(&'static str),
}
