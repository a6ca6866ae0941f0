//! The sharp-threshold toolkit: the tie counterexample family, algebraic
//! identity and dominance verifiers, the brute-force sparsest-fit oracle, and
//! the recovery sufficiency sweep.
//!
//! The organizing fact is a square matrix family, one per sparsity `s`,
//! whose restricted isometry constant of order `s + 1` lands exactly on
//! `1/sqrt(s + 1)`. On the flat signal supported on the first `s` columns,
//! every first-iteration correlation equals `s/(s+1)`: an all-way tie that an
//! unlucky tie-break turns into an unrecoverable first step. Strictly below
//! that constant, recovery in `s` iterations is guaranteed regardless of the
//! tie-break rule; the sweep in this module hunts for violations of that
//! guarantee and treats any hit as a build-breaking bug.

use crate::ensemble::{gen_sparse_signal, gen_values_for_support, ValueDistribution};
use crate::error::{Error, Result};
use crate::linalg::{self, gram, least_squares, symmetric_eigenvalues, DenseMatrix, Vector};
use crate::omp::{check_recovery, run_omp, SparseSignal, TieBreakRule, DEFAULT_RESIDUAL_TOL};
use crate::ric::{binomial, ric_exact_default, Combinations, DEFAULT_ENUMERATION_CAP};
use crate::seed;

/// Sup-norm tolerance for declaring a recovery exact.
pub const DEFAULT_RECOVERY_TOL: f64 = 1e-8;

/// Safety margin for the strict-inequality recovery condition. A constant
/// within one part in 1e10 of the threshold is treated as not certified, so
/// floating-point rounding on boundary instances can never manufacture a
/// spurious guarantee.
pub const CONDITION_MARGIN: f64 = 1e-10;

/// The sharp recovery threshold `1/sqrt(s + 1)` for `s`-sparse signals.
pub fn recovery_threshold(s: usize) -> f64 {
    1.0 / ((s as f64) + 1.0).sqrt()
}

/// Robust form of the strict condition `delta < 1/sqrt(s + 1)`.
pub fn certified_below_threshold(delta: f64, s: usize) -> bool {
    delta < recovery_threshold(s) - CONDITION_MARGIN
}

/// Correlations `<Ax, A e_k>` for every column index `k`.
pub fn correlations(a: &DenseMatrix, x_dense: &[f64]) -> Result<Vec<f64>> {
    let ax = a.matvec(x_dense)?;
    a.transpose_matvec(&ax)
}

// ---------------------------------------------------------------------------
// Counterexample family
// ---------------------------------------------------------------------------

/// The order-`s` tie instance: matrix, predicted spectrum and constant, the
/// adversarial flat signal, and the correlation value every column ties at.
#[derive(Debug, Clone)]
pub struct CounterexampleBundle {
    pub s: usize,
    /// (s+1) x (s+1): scaled identity block, a mixing last column, and a
    /// unit bottom-right entry.
    pub matrix: DenseMatrix,
    /// `1/sqrt(s + 1)`.
    pub predicted_delta: f64,
    /// Ascending Gram eigenvalues: `1 - 1/sqrt(s+1)`, then `s/(s+1)` with
    /// multiplicity `s - 1`, then `1 + 1/sqrt(s+1)`.
    pub predicted_spectrum: Vec<f64>,
    /// The flat signal (1, .., 1, 0).
    pub adversarial_signal: SparseSignal,
    /// `s/(s+1)`, the common value of every first-iteration correlation.
    pub predicted_tie_value: f64,
}

/// Build the order-`s` tie instance.
pub fn build_counterexample(s: usize) -> Result<CounterexampleBundle> {
    if s == 0 {
        return Err(Error::InvalidS);
    }
    let n = s + 1;
    let sf = s as f64;
    let diag = (sf / (sf + 1.0)).sqrt();
    let mix_col = 1.0 / (sf * (sf + 1.0)).sqrt();

    let mut matrix = DenseMatrix::zeros(n, n);
    for i in 0..s {
        matrix.set(i, i, diag);
        matrix.set(i, s, mix_col);
    }
    matrix.set(s, s, 1.0);

    let root = (sf + 1.0).sqrt();
    let mut predicted_spectrum = Vec::with_capacity(n);
    predicted_spectrum.push(1.0 - 1.0 / root);
    predicted_spectrum.extend(std::iter::repeat(sf / (sf + 1.0)).take(s - 1));
    predicted_spectrum.push(1.0 + 1.0 / root);

    let adversarial_signal = SparseSignal::new(n, (0..s).collect(), vec![1.0; s])?;

    Ok(CounterexampleBundle {
        s,
        matrix,
        predicted_delta: 1.0 / root,
        predicted_spectrum,
        adversarial_signal,
        predicted_tie_value: sf / (sf + 1.0),
    })
}

/// Outcome of checking a bundle against its own predictions.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub s: usize,
    /// Exact constant of order s+1 equals the predicted one within 1e-10.
    pub delta_matches: bool,
    /// Measured Gram spectrum equals the predicted multiset within 1e-10.
    pub spectrum_matches: bool,
    /// All s+1 first-iteration correlations equal s/(s+1) within 1e-12.
    pub ties_match: bool,
    /// Highest-index tie-breaking walks into the trap column first and fails
    /// to recover after s iterations.
    pub omp_fails_under_highest_index: bool,
    pub measured_delta: f64,
    pub measured_spectrum: Vec<f64>,
    pub measured_correlations: Vec<f64>,
    /// 0-based column chosen in the first iteration under HighestIndex.
    pub first_selected_index: usize,
    pub recovered_after_s_iterations: bool,
}

impl CounterexampleReport {
    pub fn all_pass(&self) -> bool {
        self.delta_matches
            && self.spectrum_matches
            && self.ties_match
            && self.omp_fails_under_highest_index
    }
}

/// Measure a bundle: exact constant, Gram spectrum, first-iteration
/// correlations, and the highest-index pursuit outcome.
pub fn verify_counterexample(bundle: &CounterexampleBundle) -> Result<CounterexampleReport> {
    let s = bundle.s;
    let a = &bundle.matrix;

    let ric = ric_exact_default(a, s + 1)?;
    let delta_matches = (ric.delta - bundle.predicted_delta).abs() <= 1e-10;

    let spectrum = symmetric_eigenvalues(&gram(a))?;
    let spectrum_matches = spectrum.eigenvalues.len() == bundle.predicted_spectrum.len()
        && spectrum
            .eigenvalues
            .iter()
            .zip(&bundle.predicted_spectrum)
            .all(|(got, want)| (got - want).abs() <= 1e-10);

    let x_dense = bundle.adversarial_signal.to_dense();
    let corr = correlations(a, &x_dense)?;
    let ties_match = corr
        .iter()
        .all(|c| (c - bundle.predicted_tie_value).abs() <= 1e-12);

    let b = Vector::new(a.matvec(&x_dense)?)?;
    let trace = run_omp(a, &b, s, TieBreakRule::HighestIndex, DEFAULT_RESIDUAL_TOL)?;
    let first_selected_index = trace.iterations[0].selected_index;
    let recovered = check_recovery(
        &trace.final_estimate,
        &bundle.adversarial_signal,
        DEFAULT_RECOVERY_TOL,
    )?;
    let omp_fails_under_highest_index = first_selected_index == s && !recovered;

    Ok(CounterexampleReport {
        s,
        delta_matches,
        spectrum_matches,
        ties_match,
        omp_fails_under_highest_index,
        measured_delta: ric.delta,
        measured_spectrum: spectrum.eigenvalues,
        measured_correlations: corr,
        first_selected_index,
        recovered_after_s_iterations: recovered,
    })
}

// ---------------------------------------------------------------------------
// The t parameter and the squared-norm identity
// ---------------------------------------------------------------------------

/// Sign choice for the identity parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The parameter `t = +-(sqrt(s+1) - 1)/sqrt(s)`. Its closed forms are what
/// make the threshold sharp: `(1 - t^2)/(1 + t^2) = 1/sqrt(s+1)` and
/// `2t/(1 - t^2) = +-sqrt(s)`.
pub fn tie_parameter(s: usize, sign: Sign) -> f64 {
    let sf = s as f64;
    sign.value() * ((sf + 1.0).sqrt() - 1.0) / sf.sqrt()
}

/// One instance of the squared-norm identity: a matrix, a signal, a probe
/// column, and the sign/sparsity pair fixing `t`.
#[derive(Debug, Clone)]
pub struct LemmaOneInstance {
    s: usize,
    sign: Sign,
    t: f64,
    probe_column: usize,
    x: Vector,
    a: DenseMatrix,
}

impl LemmaOneInstance {
    pub fn new(s: usize, sign: Sign, probe_column: usize, x: Vector, a: DenseMatrix) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidArgument("identity parameter needs s >= 1".into()));
        }
        if x.len() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "signal of length {} against {} columns",
                x.len(),
                a.cols()
            )));
        }
        if probe_column >= a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "probe column {} out of range for {} columns",
                probe_column,
                a.cols()
            )));
        }
        Ok(Self {
            s,
            sign,
            t: tie_parameter(s, sign),
            probe_column,
            x,
            a,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Absolute defect of the identity
/// `||A(x + t e_k)||^2 - ||A(t^2 x - t e_k)||^2
///    = (1 - t^4) (<Ax, Ax> +- sqrt(s) <Ax, A e_k>)`.
///
/// The identity is algebraic, so for any finite instance the defect is pure
/// rounding noise: at most about `1e-10 * (1 + ||Ax||^2)`.
pub fn lemma1_residual(inst: &LemmaOneInstance) -> Result<f64> {
    let t = inst.t;
    let k = inst.probe_column;
    let n = inst.a.cols();

    let mut plus = inst.x.as_slice().to_vec();
    plus[k] += t;
    let mut minus: Vec<f64> = inst.x.iter().map(|v| t * t * v).collect();
    minus[k] -= t;

    let a_plus = inst.a.matvec(&plus)?;
    let a_minus = inst.a.matvec(&minus)?;
    let lhs = linalg::dot(&a_plus, &a_plus) - linalg::dot(&a_minus, &a_minus);

    let ax = inst.a.matvec(inst.x.as_slice())?;
    let mut ek = vec![0.0; n];
    ek[k] = 1.0;
    let aek = inst.a.matvec(&ek)?;
    let rhs = (1.0 - t.powi(4))
        * (linalg::dot(&ax, &ax) + inst.sign.value() * (inst.s as f64).sqrt() * linalg::dot(&ax, &aek));

    Ok((lhs - rhs).abs())
}

// ---------------------------------------------------------------------------
// Dominance margin
// ---------------------------------------------------------------------------

/// Margin by which the on-support correlation peak dominates every
/// off-prefix correlation: `min_{k > s} (S_0 - |S_k|)` where
/// `S_k = <Ax, A e_k>` and `S_0 = max_{k <= s} |S_k|`.
///
/// The signal support must live inside the prefix `{0, .., s-1}` (use
/// [`prefix_canonicalize`] first for scattered supports). No normalization is
/// applied: the margin scales linearly with the signal, so its sign — the
/// quantity the dominance claim is about — is scale invariant.
pub fn lemma2_margin(a: &DenseMatrix, s: usize, x: &SparseSignal) -> Result<f64> {
    let n = a.cols();
    if x.dimension() != n {
        return Err(Error::DimensionMismatch(format!(
            "signal dimension {} against {} columns",
            x.dimension(),
            n
        )));
    }
    if s >= n {
        return Err(Error::InvalidSupport(format!(
            "prefix length s = {s} leaves no off-prefix column among {n}"
        )));
    }
    if x.sparsity() == 0 {
        return Err(Error::InvalidSupport("empty support".into()));
    }
    if x.support().iter().any(|&i| i >= s) {
        return Err(Error::InvalidSupport(format!(
            "support {:?} is not contained in the prefix of length {s}",
            x.support()
        )));
    }

    let corr = correlations(a, &x.to_dense())?;
    let peak = corr[..s].iter().map(|c| c.abs()).fold(0.0_f64, f64::max);
    let margin = corr[s..]
        .iter()
        .map(|c| peak - c.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(margin)
}

/// Permute columns so the signal support becomes the prefix `{0, .., k-1}`,
/// preserving the relative order of support and non-support columns. Returns
/// the permuted matrix and the remapped signal.
pub fn prefix_canonicalize(a: &DenseMatrix, x: &SparseSignal) -> Result<(DenseMatrix, SparseSignal)> {
    let n = a.cols();
    if x.dimension() != n {
        return Err(Error::DimensionMismatch(format!(
            "signal dimension {} against {} columns",
            x.dimension(),
            n
        )));
    }
    let support = x.support();
    let mut order: Vec<usize> = support.to_vec();
    order.extend((0..n).filter(|i| !support.contains(i)));
    let permuted = a.columns(&order)?;
    let canonical = SparseSignal::new(n, (0..x.sparsity()).collect(), x.values().to_vec())?;
    Ok((permuted, canonical))
}

// ---------------------------------------------------------------------------
// Brute-force sparsest fit
// ---------------------------------------------------------------------------

/// Sparsest signal fitting `b` within `fit_tol * max(1, ||b||)`, found by
/// exhaustive search over sparsity levels `0, 1, .., s_max` with supports in
/// lexicographic order. Returns `None` when nothing fits.
///
/// Numerically dependent supports are skipped: anything they can fit, some
/// independent subset fits at a smaller level already searched.
pub fn l0_brute_force(
    a: &DenseMatrix,
    b: &Vector,
    s_max: usize,
    fit_tol: f64,
) -> Result<Option<SparseSignal>> {
    let n = a.cols();
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} against {} rows",
            b.len(),
            a.rows()
        )));
    }
    if s_max > n {
        return Err(Error::InvalidOrder { s: s_max, cols: n });
    }

    let threshold = fit_tol * linalg::norm2(b).max(1.0);
    if linalg::norm2(b) <= threshold {
        return Ok(Some(SparseSignal::empty(n)));
    }

    // Levels beyond the row count cannot fit anything new: any fit through a
    // wider support is already achievable through an independent subset.
    for level in 1..=s_max.min(a.rows()) {
        let total = binomial(n, level);
        if total > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::EnumerationTooLarge {
                supports: total,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let mut combos = Combinations::new(n, level);
        while let Some(support) = combos.next_support() {
            let sub = a.columns(support)?;
            let (coeffs, residual) = match least_squares(&sub, b) {
                Ok(solution) => solution,
                Err(Error::RankDeficient { .. }) => continue,
                Err(other) => return Err(other),
            };
            if linalg::norm2(&residual) <= threshold {
                let (kept_support, kept_values): (Vec<usize>, Vec<f64>) = support
                    .iter()
                    .copied()
                    .zip(coeffs.iter().copied())
                    .filter(|&(_, c)| c != 0.0)
                    .unzip();
                return Ok(Some(SparseSignal::new(n, kept_support, kept_values)?));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Sufficiency sweep
// ---------------------------------------------------------------------------

/// How a sweep generates its trial signals.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    /// Enumerate every size-`s` support (with `trials` value patterns each)
    /// instead of sampling random signals.
    pub exhaustive: bool,
    pub distribution: ValueDistribution,
    /// Exhaustive mode: value patterns per support (the first is always the
    /// all-ones flat pattern). Monte Carlo mode: number of random signals.
    pub trials: usize,
    pub seed: u64,
}

/// One failed run: the signal, the rule, and the pursuit's selections.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub trial: usize,
    pub rule: TieBreakRule,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
    pub selected: Vec<usize>,
}

/// Outcome of a sufficiency sweep on one matrix.
#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Exact constant of order s+1.
    pub delta: f64,
    /// The sharp threshold `1/sqrt(s+1)`.
    pub threshold: f64,
    /// Whether `delta` sits strictly (robustly) below the threshold.
    pub condition_holds: bool,
    pub total_runs: usize,
    pub recovered_runs: usize,
    /// Failed runs in trial order.
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn all_recovered(&self) -> bool {
        self.recovered_runs == self.total_runs
    }

    pub fn recovery_rate(&self) -> f64 {
        if self.total_runs == 0 {
            1.0
        } else {
            self.recovered_runs as f64 / self.total_runs as f64
        }
    }

    /// True when the guarantee was certified and some run still failed.
    /// This is never expected to fire; a hit is a build-breaking bug.
    pub fn theorem1_violated(&self) -> bool {
        self.condition_holds && !self.all_recovered()
    }
}

/// Exercise the recovery guarantee on one matrix: compute the exact constant
/// of order `s + 1`, generate trial `s`-sparse signals, and pursue each one
/// under all three tie-break rules.
pub fn theorem1_sweep(a: &DenseMatrix, s: usize, spec: &TrialSpec) -> Result<SweepReport> {
    let n = a.cols();
    if s == 0 || s >= n || s > a.rows() {
        return Err(Error::InvalidOrder { s, cols: n });
    }

    let delta = ric_exact_default(a, s + 1)?.delta;
    let threshold = recovery_threshold(s);
    let condition_holds = certified_below_threshold(delta, s);

    let mut signals: Vec<SparseSignal> = Vec::new();
    if spec.exhaustive {
        let patterns = spec.trials.max(1);
        let total = binomial(n, s).saturating_mul(patterns as u128);
        if total > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::EnumerationTooLarge {
                supports: total,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let mut combos = Combinations::new(n, s);
        let mut rank: u64 = 0;
        while let Some(support) = combos.next_support() {
            for pattern in 0..patterns {
                let values = if pattern == 0 {
                    // The flat all-ones pattern is the tie-prone one; always
                    // include it.
                    vec![1.0; s]
                } else {
                    let pattern_seed = seed::mix(seed::mix(spec.seed, rank), pattern as u64);
                    let dist = if pattern == 1 {
                        ValueDistribution::FlatSigns
                    } else {
                        spec.distribution
                    };
                    gen_values_for_support(support, pattern_seed, dist)
                };
                signals.push(SparseSignal::new(n, support.to_vec(), values)?);
            }
            rank += 1;
        }
    } else {
        for trial in 0..spec.trials {
            signals.push(gen_sparse_signal(
                n,
                s,
                seed::mix(spec.seed, trial as u64),
                spec.distribution,
            )?);
        }
    }

    let (total_runs, recovered_runs, failures) = pursue_signals(a, s, &signals, spec.seed)?;
    Ok(SweepReport {
        delta,
        threshold,
        condition_holds,
        total_runs,
        recovered_runs,
        failures,
    })
}

/// Pursue each signal under all three tie-break rules (the seeded rule gets a
/// per-trial seed derived from `seed`). Returns the run count, the recovered
/// count, and the failures in trial order.
pub fn pursue_signals(
    a: &DenseMatrix,
    s: usize,
    signals: &[SparseSignal],
    seed: u64,
) -> Result<(usize, usize, Vec<SweepFailure>)> {
    let mut total_runs = 0;
    let mut recovered_runs = 0;
    let mut failures = Vec::new();
    for (trial, signal) in signals.iter().enumerate() {
        let b = Vector::new(a.matvec(&signal.to_dense())?)?;
        let rules = [
            TieBreakRule::LowestIndex,
            TieBreakRule::HighestIndex,
            TieBreakRule::SeededRandom(seed::mix(seed, trial as u64)),
        ];
        for rule in rules {
            let trace = run_omp(a, &b, s, rule, DEFAULT_RESIDUAL_TOL)?;
            let recovered = check_recovery(&trace.final_estimate, signal, DEFAULT_RECOVERY_TOL)?;
            total_runs += 1;
            if recovered {
                recovered_runs += 1;
            } else {
                failures.push(SweepFailure {
                    trial,
                    rule,
                    support: signal.support().to_vec(),
                    values: signal.values().to_vec(),
                    selected: trace.selected_indices(),
                });
            }
        }
    }
    Ok((total_runs, recovered_runs, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn build_rejects_zero() {
        assert!(matches!(build_counterexample(0), Err(Error::InvalidS)));
    }

    #[test]
    fn build_s1_matrix_entries() {
        let bundle = build_counterexample(1).unwrap();
        let c = 1.0 / 2.0_f64.sqrt();
        let expected = [c, c, 0.0, 1.0];
        for (got, want) in bundle.matrix.entries().iter().zip(expected) {
            assert_close(*got, want, 1e-15);
        }
        assert_eq!(bundle.adversarial_signal.support(), &[0]);
        assert_eq!(bundle.adversarial_signal.values(), &[1.0]);
        assert_close(bundle.predicted_tie_value, 0.5, 1e-15);
        assert_eq!(bundle.predicted_spectrum.len(), 2);
    }

    #[test]
    fn build_s3_tie_value() {
        let bundle = build_counterexample(3).unwrap();
        assert_close(bundle.predicted_tie_value, 0.75, 1e-15);
        assert_close(bundle.predicted_delta, 0.5, 1e-15);
    }

    #[test]
    fn gram_has_closed_form_blocks() {
        for s in 1..=8 {
            let bundle = build_counterexample(s).unwrap();
            let g = gram(&bundle.matrix);
            let sf = s as f64;
            for i in 0..=s {
                for j in 0..=s {
                    let expected = match (i == s, j == s) {
                        (true, true) => 1.0 + 1.0 / (sf + 1.0),
                        (true, false) | (false, true) => 1.0 / (sf + 1.0),
                        (false, false) if i == j => sf / (sf + 1.0),
                        _ => 0.0,
                    };
                    assert_close(g.get(i, j), expected, 1e-14);
                }
            }
        }
    }

    #[test]
    fn gram_eigenvector_identities_by_direct_multiply() {
        for s in 1..=8 {
            let bundle = build_counterexample(s).unwrap();
            let g = gram(&bundle.matrix);
            let n = s + 1;
            let sf = s as f64;

            // Mean-zero prefix vectors: a basis e_j - e_{j+1} of the
            // (s-1)-dimensional eigenspace of s/(s+1).
            for j in 0..s.saturating_sub(1) {
                let mut v = vec![0.0; n];
                v[j] = 1.0;
                v[j + 1] = -1.0;
                let gv = g.matvec(&v).unwrap();
                for (lhs, x) in gv.iter().zip(&v) {
                    assert!((lhs - (sf / (sf + 1.0)) * x).abs() <= 1e-12);
                }
            }

            // The two mixing eigenvectors (1, .., 1, 1 +- sqrt(s+1)).
            for sign in Sign::BOTH {
                let mut w = vec![1.0; n];
                w[s] = 1.0 + sign.value() * (sf + 1.0).sqrt();
                let lambda = 1.0 + sign.value() / (sf + 1.0).sqrt();
                let gw = g.matvec(&w).unwrap();
                for (lhs, x) in gw.iter().zip(&w) {
                    assert!((lhs - lambda * x).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn verify_counterexample_s1_and_s5() {
        let report = verify_counterexample(&build_counterexample(1).unwrap()).unwrap();
        assert!(report.all_pass(), "{report:?}");

        let report = verify_counterexample(&build_counterexample(5).unwrap()).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_close(report.measured_delta, 0.4082482905, 1e-10);
        assert_eq!(report.first_selected_index, 5);
    }

    #[test]
    fn verify_detects_perturbation() {
        let mut bundle = build_counterexample(2).unwrap();
        let mut entries = bundle.matrix.entries().to_vec();
        entries[1] += 0.01;
        bundle.matrix = DenseMatrix::new(3, 3, entries).unwrap();
        let report = verify_counterexample(&bundle).unwrap();
        assert!(!report.all_pass(), "{report:?}");
    }

    #[test]
    fn tie_parameter_closed_forms() {
        for s in 1..=100 {
            let sf = s as f64;
            for sign in Sign::BOTH {
                let t = tie_parameter(s, sign);
                assert!(t * t < 1.0);
                // t^2 = (sqrt(s+1) - 1)/(sqrt(s+1) + 1)
                let root = (sf + 1.0).sqrt();
                assert_close(t * t, (root - 1.0) / (root + 1.0), 1e-12);
                assert_close((1.0 - t * t) / (1.0 + t * t), 1.0 / root, 1e-12);
                assert_close(2.0 * t / (1.0 - t * t), sign.value() * sf.sqrt(), 1e-12);
            }
        }
        // s = 1, minus sign: 2t/(1 - t^2) = -1 exactly as sqrt(1) = 1.
        let t = tie_parameter(1, Sign::Minus);
        assert_close(2.0 * t / (1.0 - t * t), -1.0, 1e-14);
    }

    #[test]
    fn lemma1_residual_orthogonal_case() {
        // Identity matrix, x = e_1, probe column 2: both sides reduce to
        // 1 - t^4 analytically.
        let a = DenseMatrix::identity(3);
        let x = Vector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let inst = LemmaOneInstance::new(1, Sign::Plus, 1, x, a).unwrap();
        let defect = lemma1_residual(&inst).unwrap();
        assert!(defect <= 1e-14, "defect {defect}");
    }

    #[test]
    fn lemma1_residual_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for s in [1usize, 4, 9] {
            for sign in Sign::BOTH {
                for _ in 0..50 {
                    let m = rng.random_range(4..9);
                    let n = rng.random_range(4..11);
                    let a = DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
                    let x = Vector::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .unwrap();
                    let k = rng.random_range(0..n);
                    let ax = a.matvec(x.as_slice()).unwrap();
                    let scale = 1.0 + linalg::dot(&ax, &ax);
                    let inst = LemmaOneInstance::new(s, sign, k, x, a).unwrap();
                    let defect = lemma1_residual(&inst).unwrap();
                    assert!(defect <= 1e-10 * scale, "defect {defect} vs scale {scale}");
                }
            }
        }
    }

    #[test]
    fn lemma1_instance_validation() {
        let a = DenseMatrix::identity(2);
        let x = Vector::new(vec![1.0, 0.0]).unwrap();
        assert!(LemmaOneInstance::new(0, Sign::Plus, 0, x.clone(), a.clone()).is_err());
        assert!(LemmaOneInstance::new(1, Sign::Plus, 2, x.clone(), a.clone()).is_err());
        let short = Vector::new(vec![1.0]).unwrap();
        assert!(LemmaOneInstance::new(1, Sign::Plus, 0, short, a).is_err());
    }

    #[test]
    fn lemma2_margin_identity_matrix() {
        let a = DenseMatrix::identity(5);
        let x = SparseSignal::new(5, vec![0], vec![1.0]).unwrap();
        for s in 1..5 {
            let margin = lemma2_margin(&a, s, &x).unwrap();
            assert_close(margin, 1.0, 1e-14);
        }
    }

    #[test]
    fn lemma2_margin_is_zero_on_the_boundary_instance() {
        for s in 1..=6 {
            let bundle = build_counterexample(s).unwrap();
            let margin = lemma2_margin(&bundle.matrix, s, &bundle.adversarial_signal).unwrap();
            assert!(margin.abs() <= 1e-12, "s = {s}: margin {margin}");
        }
    }

    #[test]
    fn lemma2_margin_positive_under_certified_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut certified = 0;
        while certified < 5 {
            let seed: u64 = rng.random();
            let a = crate::ensemble::gen_gaussian_matrix(20, 8, seed, true);
            let s = 2;
            let delta = ric_exact_default(&a, s + 1).unwrap().delta;
            if !certified_below_threshold(delta, s) {
                continue;
            }
            certified += 1;
            for trial in 0..20 {
                let x = gen_sparse_signal(s, rng.random_range(1..=s), seed::mix(seed, trial), ValueDistribution::Mixed)
                    .unwrap();
                // Lift the support into the ambient dimension's prefix.
                let x = SparseSignal::new(8, x.support().to_vec(), x.values().to_vec()).unwrap();
                let margin = lemma2_margin(&a, s, &x).unwrap();
                assert!(margin > 0.0, "margin {margin} with delta {delta}");
            }
        }
    }

    #[test]
    fn lemma2_margin_validation() {
        let a = DenseMatrix::identity(3);
        let x = SparseSignal::new(3, vec![2], vec![1.0]).unwrap();
        // Support outside the prefix.
        assert!(lemma2_margin(&a, 2, &x).is_err());
        // No off-prefix column.
        let x = SparseSignal::new(3, vec![0], vec![1.0]).unwrap();
        assert!(lemma2_margin(&a, 3, &x).is_err());
        // Dimension mismatch.
        let x = SparseSignal::new(2, vec![0], vec![1.0]).unwrap();
        assert!(lemma2_margin(&a, 2, &x).is_err());
    }

    #[test]
    fn prefix_canonicalize_preserves_margin() {
        let a = crate::ensemble::gen_gaussian_matrix(10, 6, 99, true);
        let x = SparseSignal::new(6, vec![1, 4], vec![1.5, -0.5]).unwrap();
        let (a_canon, x_canon) = prefix_canonicalize(&a, &x).unwrap();
        assert_eq!(x_canon.support(), &[0, 1]);

        // The canonical instance must reproduce the margin computed directly
        // from the scattered instance.
        let corr = correlations(&a, &x.to_dense()).unwrap();
        let peak = [1usize, 4]
            .iter()
            .map(|&k| corr[k].abs())
            .fold(0.0_f64, f64::max);
        let direct = [0usize, 2, 3, 5]
            .iter()
            .map(|&k| peak - corr[k].abs())
            .fold(f64::INFINITY, f64::min);

        let canonical = lemma2_margin(&a_canon, 2, &x_canon).unwrap();
        assert_close(canonical, direct, 1e-12);
    }

    #[test]
    fn l0_zero_rhs_is_the_empty_signal() {
        let a = DenseMatrix::identity(4);
        let b = Vector::zeros(4);
        let found = l0_brute_force(&a, &b, 2, 1e-10).unwrap().unwrap();
        assert_eq!(found.sparsity(), 0);
    }

    #[test]
    fn l0_recovers_counterexample_signal() {
        for s in [1usize, 2, 3] {
            let bundle = build_counterexample(s).unwrap();
            let a = &bundle.matrix;
            let truth = &bundle.adversarial_signal;
            let b = Vector::new(a.matvec(&truth.to_dense()).unwrap()).unwrap();
            let found = l0_brute_force(a, &b, s, 1e-8).unwrap().unwrap();
            assert_eq!(found.support(), truth.support());
            for (got, want) in found.values().iter().zip(truth.values()) {
                assert_close(*got, *want, 1e-8);
            }
        }
    }

    #[test]
    fn l0_random_two_sparse() {
        let a = crate::ensemble::gen_gaussian_matrix(6, 10, 31, false);
        let truth = SparseSignal::new(10, vec![2, 7], vec![2.0, -1.5]).unwrap();
        let b = Vector::new(a.matvec(&truth.to_dense()).unwrap()).unwrap();
        let found = l0_brute_force(&a, &b, 2, 1e-8).unwrap().unwrap();
        assert_eq!(found.support(), truth.support());
        for (got, want) in found.values().iter().zip(truth.values()) {
            assert_close(*got, *want, 1e-8);
        }
    }

    #[test]
    fn l0_reports_no_solution() {
        let a = DenseMatrix::identity(2);
        let b = Vector::new(vec![1.0, 1.0]).unwrap();
        assert!(l0_brute_force(&a, &b, 1, 1e-10).unwrap().is_none());
        assert!(l0_brute_force(&a, &b, 2, 1e-10).unwrap().is_some());
        assert!(l0_brute_force(&a, &b, 3, 1e-10).is_err());
    }

    #[test]
    fn sweep_identity_matrix_recovers_everything() {
        let a = DenseMatrix::identity(4);
        let spec = TrialSpec {
            exhaustive: true,
            distribution: ValueDistribution::Mixed,
            trials: 3,
            seed: 5,
        };
        let report = theorem1_sweep(&a, 2, &spec).unwrap();
        assert!(report.condition_holds);
        assert!(report.all_recovered());
        assert!(!report.theorem1_violated());
        // C(4, 2) supports, 3 patterns, 3 rules.
        assert_eq!(report.total_runs, 6 * 3 * 3);
        assert_close(report.recovery_rate(), 1.0, 0.0);
    }

    #[test]
    fn sweep_boundary_instance_reports_failures_without_violation() {
        let bundle = build_counterexample(2).unwrap();
        let spec = TrialSpec {
            exhaustive: true,
            distribution: ValueDistribution::Mixed,
            trials: 3,
            seed: 11,
        };
        let report = theorem1_sweep(&bundle.matrix, 2, &spec).unwrap();
        // delta equals the threshold: the guarantee must not claim this
        // instance, and the flat pattern must produce failures.
        assert!(!report.condition_holds);
        assert!(!report.failures.is_empty());
        assert!(!report.theorem1_violated());
        assert!(report
            .failures
            .iter()
            .any(|f| f.rule == TieBreakRule::HighestIndex));
    }
}
