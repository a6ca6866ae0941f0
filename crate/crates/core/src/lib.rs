//! Greedy sparse recovery at desk scale: Orthogonal Matching Pursuit with
//! explicit tie-breaking, exact restricted isometry constants by exhaustive
//! enumeration, the sharp-threshold tie counterexample family, and seeded
//! recovery experiments.
//!
//! The crate is organized around five pieces:
//!
//! - [`linalg`]: dense Householder least squares and a cyclic Jacobi
//!   eigensolver, self-contained and sized for small matrices.
//! - [`omp`]: the pursuit itself, with a full per-iteration trace and a
//!   configurable, reproducible tie-break rule.
//! - [`ric`]: exact restricted isometry constants by support enumeration,
//!   plus a seeded Monte Carlo lower bound.
//! - [`sharpness`]: the tie counterexample family, identity and dominance
//!   verifiers, the brute-force sparsest-fit oracle, and the recovery
//!   sufficiency sweep.
//! - [`ensemble`], [`experiment`], [`io`], [`report`]: seeded instance
//!   generation, the experiment driver behind the CLI, file formats, and
//!   1-based report shapes.
//!
//! Indices are 0-based inside the library and 1-based in every file format
//! and printed report.

pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod omp;
pub mod report;
pub mod ric;
pub mod seed;
pub mod sharpness;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Spectrum, Vector};
pub use omp::{OmpTrace, SparseSignal, TieBreakRule};
pub use ric::RicReport;
pub use sharpness::CounterexampleBundle;
