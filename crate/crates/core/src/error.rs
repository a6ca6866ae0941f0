//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by matrix construction, the numerical kernels, and the
/// recovery / verification drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible shapes between a matrix and a vector, or between two operands.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A constructor received a NaN or infinite entry.
    #[error("non-finite entry at flat position {position}")]
    NonFinite { position: usize },

    /// An argument is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The selected columns are numerically dependent; the factor diagonal
    /// collapsed below the rank tolerance.
    #[error(
        "rank deficient: smallest factor diagonal {min_diag:.3e} \
         is below {tol:.0e} x largest {max_diag:.3e}"
    )]
    RankDeficient {
        min_diag: f64,
        max_diag: f64,
        tol: f64,
    },

    /// The eigensolver input is not symmetric within tolerance.
    #[error("matrix is not symmetric: |G[{row},{col}] - G[{col},{row}]| = {deviation:.3e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    /// The eigensolver hit its sweep cap before the off-diagonal mass vanished.
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    /// A sparsity order outside 1..=cols.
    #[error("invalid order s = {s} for a matrix with {cols} columns")]
    InvalidOrder { s: usize, cols: usize },

    /// A support set with out-of-range, duplicate, or otherwise unusable indices.
    #[error("invalid support: {0}")]
    InvalidSupport(String),

    /// Counterexample construction requires s >= 1.
    #[error("counterexample order must satisfy s >= 1")]
    InvalidS,

    /// Exhaustive enumeration would visit more supports than the cap allows.
    /// The Monte Carlo lower bound is the intended fallback.
    #[error(
        "enumeration of {supports} supports exceeds the cap of {cap}; \
         use the Monte Carlo lower bound instead"
    )]
    EnumerationTooLarge { supports: u128, cap: u64 },

    /// `select_index` was asked to pick from an exhausted candidate set.
    #[error("all indices are already selected")]
    AllIndicesSelected,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A matrix / signal / config file that does not parse.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
