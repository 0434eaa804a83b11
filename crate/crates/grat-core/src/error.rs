use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank mismatch: expected {expected} axes, got {actual}")]
    RankMismatch { expected: usize, actual: usize },

    #[error("group extent {gdim} does not divide grid extent {dim} on axis {axis}")]
    Divisibility {
        axis: usize,
        dim: usize,
        gdim: usize,
    },

    #[error("coordinate {coord:?} out of bounds for grid {dims:?}")]
    OutOfBounds { coord: Vec<usize>, dims: Vec<usize> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{what} requires a 2D grid, got rank {rank}")]
    UnsupportedRank { what: &'static str, rank: usize },

    #[error("{0} requires a grouped scheme")]
    UnsupportedScheme(String),

    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),

    #[error("query row {0} has no attendable keys")]
    FullyMaskedRow(usize),

    #[error("plan does not match inputs: {0}")]
    PlanGridMismatch(String),

    #[error("bad magic: expected \"GRT1\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("file size {actual} bytes does not match declared contents ({expected} bytes)")]
    TruncatedFile { expected: u64, actual: u64 },

    #[error("tensor rank may not be zero")]
    RankZero,

    #[error("dimension product exceeds addressable size")]
    OverflowDims,

    #[error("benchmark needs at least 3 repetitions, got {0}")]
    InvalidReps(usize),

    #[error("{executor} executor deviates from the dense oracle by {max_abs:.3e}")]
    OracleMismatch {
        executor: &'static str,
        max_abs: f64,
    },

    #[error("row {row} sums to {sum} (deviation from 1 exceeds {tol})")]
    NonStochasticRows { row: usize, sum: f64, tol: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
