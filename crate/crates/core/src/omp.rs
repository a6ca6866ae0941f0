//! Orthogonal Matching Pursuit with an explicit tie-breaking rule and a full
//! per-iteration trace.
//!
//! The selection step maximizes the unnormalized correlation of the residual
//! against the raw matrix columns. Ties are a first-class concept here, not a
//! numerical accident: at the sharp recovery threshold the failure mode is an
//! exact all-way tie in the first iteration, so the rule that resolves ties
//! decides the outcome and must be explicit and reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, Vector};
use crate::seed;

/// Relative tie tolerance: indices whose correlation magnitude is within
/// this fraction of the maximum are considered tied with it.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Residual norm below which a run is considered converged.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-12;

/// An s-sparse signal: dimension, sorted support (0-based), and one nonzero
/// value per support index. All user-facing output converts indices to
/// 1-based; internally everything is 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    dimension: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    /// Build a signal from parallel support/value lists. The pairs are sorted
    /// by index; duplicate or out-of-range indices and zero or non-finite
    /// values are rejected.
    pub fn new(dimension: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::InvalidSupport(format!(
                "{} support indices against {} values",
                support.len(),
                values.len()
            )));
        }
        let mut pairs: Vec<(usize, f64)> = support.into_iter().zip(values).collect();
        pairs.sort_by_key(|&(i, _)| i);
        for window in pairs.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::InvalidSupport(format!(
                    "duplicate index {}",
                    window[0].0
                )));
            }
        }
        for &(i, v) in &pairs {
            if i >= dimension {
                return Err(Error::InvalidSupport(format!(
                    "index {} out of range for dimension {}",
                    i, dimension
                )));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(Error::InvalidSupport(format!(
                    "value {} at index {} (zero entries must be removed from the support)",
                    v, i
                )));
            }
        }
        let (support, values) = pairs.into_iter().unzip();
        Ok(Self {
            dimension,
            support,
            values,
        })
    }

    /// The all-zero signal of a given dimension.
    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Sorted 0-based support.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Values aligned with [`support`](Self::support).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of nonzero entries.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

/// Policy resolving argmax ties in the selection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakRule {
    /// Pick the smallest tied index.
    LowestIndex,
    /// Pick the largest tied index.
    HighestIndex,
    /// Pick a tied index with a generator derived from (seed, iteration), so
    /// the same seed reproduces the same trace.
    SeededRandom(u64),
}

impl std::fmt::Display for TieBreakRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TieBreakRule::LowestIndex => write!(f, "low"),
            TieBreakRule::HighestIndex => write!(f, "high"),
            TieBreakRule::SeededRandom(seed) => write!(f, "rand:{seed}"),
        }
    }
}

impl std::str::FromStr for TieBreakRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(TieBreakRule::LowestIndex),
            "high" => Ok(TieBreakRule::HighestIndex),
            other => {
                if let Some(seed) = other.strip_prefix("rand:") {
                    let seed = seed.parse::<u64>().map_err(|_| {
                        Error::Parse(format!("bad seed in tie-break rule '{other}'"))
                    })?;
                    Ok(TieBreakRule::SeededRandom(seed))
                } else {
                    Err(Error::Parse(format!(
                        "unknown tie-break rule '{other}' (expected low, high, or rand:SEED)"
                    )))
                }
            }
        }
    }
}

impl serde::Serialize for TieBreakRule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for TieBreakRule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One iteration of a pursuit run.
#[derive(Debug, Clone)]
pub struct OmpIteration {
    /// 0-based column picked this iteration.
    pub selected_index: usize,
    /// Inner product of the pre-selection residual with every column.
    pub correlations: Vec<f64>,
    /// Sorted 0-based indices tied with the maximum, the selected one included.
    pub tie_set: Vec<usize>,
    /// Euclidean norm of the residual after the projection update.
    pub residual_norm_after: f64,
}

/// Full record of a pursuit run.
#[derive(Debug, Clone)]
pub struct OmpTrace {
    pub iterations: Vec<OmpIteration>,
    /// Dense estimate: zero outside the selected indices.
    pub final_estimate: Vector,
    /// Whether the residual norm reached the tolerance.
    pub converged: bool,
}

impl OmpTrace {
    /// Selected indices (0-based) in selection order.
    pub fn selected_indices(&self) -> Vec<usize> {
        self.iterations.iter().map(|it| it.selected_index).collect()
    }
}

/// Pick the next column: the not-yet-selected index of maximum correlation
/// magnitude, with ties grouped by a relative tolerance and resolved by the
/// rule. Returns the chosen index and the full sorted tie set.
pub fn select_index(
    correlations: &[f64],
    already_selected: &[usize],
    tie_break: TieBreakRule,
    tie_tol: f64,
) -> Result<(usize, Vec<usize>)> {
    let n = correlations.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty correlation vector".into()));
    }
    let mut taken = vec![false; n];
    for &i in already_selected {
        if i >= n {
            return Err(Error::InvalidSupport(format!(
                "selected index {i} out of range for {n} correlations"
            )));
        }
        taken[i] = true;
    }

    let mut max_abs: Option<f64> = None;
    for (i, c) in correlations.iter().enumerate() {
        if taken[i] {
            continue;
        }
        let a = c.abs();
        if max_abs.map_or(true, |m| a > m) {
            max_abs = Some(a);
        }
    }
    let max_abs = max_abs.ok_or(Error::AllIndicesSelected)?;

    // Relative tie window. With max_abs = 0 every free index ties at zero.
    let cutoff = max_abs - tie_tol * max_abs;
    let tie_set: Vec<usize> = (0..n)
        .filter(|&i| !taken[i] && correlations[i].abs() >= cutoff)
        .collect();

    let chosen = match tie_break {
        TieBreakRule::LowestIndex => tie_set[0],
        TieBreakRule::HighestIndex => *tie_set.last().expect("tie set is nonempty"),
        TieBreakRule::SeededRandom(rule_seed) => {
            // The iteration number is recovered from how many indices are
            // already selected, keeping this function self-contained.
            let iteration = already_selected.len() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(rule_seed, iteration));
            tie_set[rng.random_range(0..tie_set.len())]
        }
    };
    Ok((chosen, tie_set))
}

/// Run Orthogonal Matching Pursuit on `b` against the columns of `a`.
///
/// Each iteration appends the argmax-correlation index to the active set,
/// re-solves the least-squares subproblem over all active columns, and
/// replaces the residual with `b - A_active x`. The run stops when the
/// residual norm falls to `residual_tol` or after `max_iterations`.
pub fn run_omp(
    a: &DenseMatrix,
    b: &Vector,
    max_iterations: usize,
    tie_break: TieBreakRule,
    residual_tol: f64,
) -> Result<OmpTrace> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} against {} rows",
            b.len(),
            a.rows()
        )));
    }
    if max_iterations > a.rows().min(a.cols()) {
        return Err(Error::InvalidArgument(format!(
            "max_iterations = {} exceeds min(rows, cols) = {}",
            max_iterations,
            a.rows().min(a.cols())
        )));
    }
    if !(residual_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "residual_tol must be nonnegative, got {residual_tol}"
        )));
    }

    let mut residual: Vec<f64> = b.as_slice().to_vec();
    let mut residual_norm = linalg::norm2(&residual);
    let mut selected: Vec<usize> = Vec::new();
    let mut coefficients: Vec<f64> = Vec::new();
    let mut iterations: Vec<OmpIteration> = Vec::new();

    while selected.len() < max_iterations && residual_norm > residual_tol {
        let correlations = a.transpose_matvec(&residual)?;
        let (index, tie_set) = select_index(&correlations, &selected, tie_break, DEFAULT_TIE_TOL)?;
        selected.push(index);

        let active = a.columns(&selected)?;
        let (coeffs, new_residual) = linalg::least_squares(&active, b)?;
        coefficients = coeffs.into_vec();
        residual = new_residual.into_vec();
        residual_norm = linalg::norm2(&residual);

        iterations.push(OmpIteration {
            selected_index: index,
            correlations,
            tie_set,
            residual_norm_after: residual_norm,
        });
    }

    let mut estimate = vec![0.0; a.cols()];
    for (&i, &c) in selected.iter().zip(&coefficients) {
        estimate[i] = c;
    }
    Ok(OmpTrace {
        iterations,
        final_estimate: Vector::new(estimate)?,
        converged: residual_norm <= residual_tol,
    })
}

/// Sup-norm recovery check: `||estimate - truth||_inf <= tol * max(1, ||truth||_inf)`.
pub fn check_recovery(estimate: &[f64], truth: &SparseSignal, tol: f64) -> Result<bool> {
    if estimate.len() != truth.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "estimate of length {} against signal dimension {}",
            estimate.len(),
            truth.dimension()
        )));
    }
    let dense = truth.to_dense();
    let max_err = estimate
        .iter()
        .zip(&dense)
        .map(|(e, t)| (e - t).abs())
        .fold(0.0_f64, f64::max);
    let scale = dense.iter().map(|t| t.abs()).fold(1.0_f64, f64::max);
    Ok(max_err <= tol * scale)
}
