//! Exact restricted isometry constants by exhaustive support enumeration,
//! with a seeded Monte Carlo lower bound for sizes where enumeration is
//! infeasible.
//!
//! The constant of order `s` is the worst spectral deviation from 1 of any
//! `s`-column Gram submatrix. No column normalization is applied: the
//! constant is a property of the raw matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{gram, symmetric_eigenvalues, DenseMatrix};
use crate::seed;

/// Default cap on the number of enumerated supports.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Result of a restricted isometry constant computation.
#[derive(Debug, Clone)]
pub struct RicReport {
    /// Sparsity order `s`.
    pub order: usize,
    /// The constant (exact) or a lower bound on it (Monte Carlo).
    pub delta: f64,
    /// True when every support of the order was examined.
    pub is_exact: bool,
    /// Sorted 0-based support achieving `delta`; on ties, the one visited
    /// first (lexicographically first in exact mode).
    pub worst_support: Vec<usize>,
    /// Extreme Gram eigenvalues on the worst support.
    pub worst_eigen_low: f64,
    pub worst_eigen_high: f64,
    /// Number of supports examined.
    pub supports_examined: u64,
}

/// Lexicographic enumeration of the k-subsets of {0, .., n-1}, advanced in
/// place so the hot loop allocates nothing.
pub(crate) struct Combinations {
    n: usize,
    k: usize,
    current: Vec<usize>,
    started: bool,
    exhausted: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            current: (0..k).collect(),
            started: false,
            exhausted: k > n,
        }
    }

    /// Next subset in lexicographic order, or None when exhausted.
    pub(crate) fn next_support(&mut self) -> Option<&[usize]> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        // Rightmost position that can still move up.
        let mut i = self.k;
        loop {
            if i == 0 {
                self.exhausted = true;
                return None;
            }
            i -= 1;
            if self.current[i] < self.n - self.k + i {
                break;
            }
        }
        self.current[i] += 1;
        for j in (i + 1)..self.k {
            self.current[j] = self.current[j - 1] + 1;
        }
        Some(&self.current)
    }
}

/// Binomial coefficient C(n, k). Overflowing products saturate, so huge
/// results come back merely astronomical instead of wrapped; they are only
/// ever compared against small enumeration caps.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    result
}

/// Spectral deviation of one support: `(dev, eig_low, eig_high)` where `dev =
/// max(eig_high - 1, 1 - eig_low)` over the Gram submatrix of the listed
/// columns.
pub fn support_deviation(a: &DenseMatrix, support: &[usize]) -> Result<(f64, f64, f64)> {
    if support.is_empty() {
        return Err(Error::InvalidSupport("empty support".into()));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSupport(format!(
            "duplicate column in support {sorted:?}"
        )));
    }
    let sub = a.columns(&sorted)?;
    let spectrum = symmetric_eigenvalues(&gram(&sub))?;
    let eig_low = spectrum.eigenvalues[0];
    let eig_high = *spectrum.eigenvalues.last().expect("nonempty spectrum");
    let dev = (eig_high - 1.0).max(1.0 - eig_low);
    Ok((dev, eig_low, eig_high))
}

/// Exact restricted isometry constant of order `s` by enumerating every
/// support in lexicographic order. Ties on the worst deviation keep the
/// lexicographically first support, so reports are deterministic.
pub fn ric_exact(a: &DenseMatrix, s: usize, enumeration_cap: u64) -> Result<RicReport> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidOrder { s, cols: n });
    }
    let total = binomial(n, s);
    if total > enumeration_cap as u128 {
        return Err(Error::EnumerationTooLarge {
            supports: total,
            cap: enumeration_cap,
        });
    }

    let mut best: Option<(f64, Vec<usize>, f64, f64)> = None;
    let mut examined: u64 = 0;
    let mut combos = Combinations::new(n, s);
    while let Some(support) = combos.next_support() {
        let (dev, lo, hi) = support_deviation(a, support)?;
        examined += 1;
        // Strict improvement only: the first support to reach the maximum wins.
        if best.as_ref().map_or(true, |(b, ..)| dev > *b) {
            best = Some((dev, support.to_vec(), lo, hi));
        }
    }
    let (delta, worst_support, worst_eigen_low, worst_eigen_high) =
        best.expect("at least one support was enumerated");
    Ok(RicReport {
        order: s,
        delta,
        is_exact: true,
        worst_support,
        worst_eigen_low,
        worst_eigen_high,
        supports_examined: examined,
    })
}

/// [`ric_exact`] with the default enumeration cap.
pub fn ric_exact_default(a: &DenseMatrix, s: usize) -> Result<RicReport> {
    ric_exact(a, s, DEFAULT_ENUMERATION_CAP)
}

/// Monte Carlo lower bound on the constant: the worst deviation over
/// `trials` uniformly sampled supports. Deterministic given the seed.
pub fn ric_lower_bound_mc(a: &DenseMatrix, s: usize, trials: u64, rng_seed: u64) -> Result<RicReport> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidOrder { s, cols: n });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }

    let mut best: Option<(f64, Vec<usize>, f64, f64)> = None;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(rng_seed, trial));
        let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, n, s).into_vec();
        support.sort_unstable();
        let (dev, lo, hi) = support_deviation(a, &support)?;
        if best.as_ref().map_or(true, |(b, ..)| dev > *b) {
            best = Some((dev, support, lo, hi));
        }
    }
    let (delta, worst_support, worst_eigen_low, worst_eigen_high) =
        best.expect("at least one trial ran");
    Ok(RicReport {
        order: s,
        delta,
        is_exact: false,
        worst_support,
        worst_eigen_low,
        worst_eigen_high,
        supports_examined: trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharpness::build_counterexample;

    #[test]
    fn combinations_are_lexicographic() {
        let mut combos = Combinations::new(4, 2);
        let mut seen = Vec::new();
        while let Some(c) = combos.next_support() {
            seen.push(c.to_vec());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );

        let mut combos = Combinations::new(3, 0);
        assert_eq!(combos.next_support(), Some(&[][..]));
        assert_eq!(combos.next_support(), None);

        let mut combos = Combinations::new(2, 3);
        assert!(combos.next_support().is_none());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(12, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(24, 6), 134_596);
        // Saturates rather than wrapping: still far beyond any cap.
        assert!(binomial(200, 100) > 1u128 << 100);
    }

    #[test]
    fn identity_has_zero_constant() {
        let a = DenseMatrix::identity(6);
        for s in 1..=6 {
            let report = ric_exact_default(&a, s).unwrap();
            assert!(report.delta.abs() <= 1e-14);
            assert!(report.is_exact);
            assert_eq!(report.supports_examined, binomial(6, s) as u64);
        }
    }

    #[test]
    fn counterexample_constant_matches_closed_form() {
        for s in [1usize, 2, 3, 5] {
            let bundle = build_counterexample(s).unwrap();
            let report = ric_exact_default(&bundle.matrix, s + 1).unwrap();
            let expected = 1.0 / ((s as f64) + 1.0).sqrt();
            assert!(
                (report.delta - expected).abs() <= 1e-12,
                "s = {s}: {} vs {}",
                report.delta,
                expected
            );
            // An invariant of the report itself.
            let recomputed = (report.worst_eigen_high - 1.0).max(1.0 - report.worst_eigen_low);
            assert!((recomputed - report.delta).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_by_three_example() {
        let c = 1.0 / 2.0_f64.sqrt();
        let a = DenseMatrix::new(2, 3, vec![1.0, 0.0, c, 0.0, 1.0, c]).unwrap();
        let report = ric_exact_default(&a, 2).unwrap();
        assert!((report.delta - c).abs() <= 1e-12);
        // {0, 2} and {1, 2} tie; lexicographic order keeps {0, 2}.
        assert_eq!(report.worst_support, vec![0, 2]);
        assert_eq!(report.supports_examined, 3);
    }

    #[test]
    fn support_deviation_examples() {
        let a = DenseMatrix::identity(3);
        let (dev, lo, hi) = support_deviation(&a, &[1]).unwrap();
        assert!(dev.abs() <= 1e-15 && (lo - 1.0).abs() <= 1e-15 && (hi - 1.0).abs() <= 1e-15);

        // Diagonal block of the s = 2 tie matrix: Gram is (2/3) I.
        let bundle = build_counterexample(2).unwrap();
        let (dev, ..) = support_deviation(&bundle.matrix, &[0, 1]).unwrap();
        assert!((dev - 1.0 / 3.0).abs() <= 1e-14);

        let (dev, ..) = support_deviation(&bundle.matrix, &[0, 1, 2]).unwrap();
        assert!((dev - 1.0 / 3.0_f64.sqrt()).abs() <= 1e-12);

        assert!(support_deviation(&bundle.matrix, &[]).is_err());
        assert!(support_deviation(&bundle.matrix, &[0, 0]).is_err());
        assert!(support_deviation(&bundle.matrix, &[7]).is_err());
    }

    #[test]
    fn monte_carlo_covers_single_support_exactly() {
        // s' = 4 on the s = 3 tie matrix: only one support exists, so one
        // trial is exhaustive and the bound equals 1/2.
        let bundle = build_counterexample(3).unwrap();
        let report = ric_lower_bound_mc(&bundle.matrix, 4, 1, 123).unwrap();
        assert!((report.delta - 0.5).abs() <= 1e-12);
        assert!(!report.is_exact);
        assert_eq!(report.worst_support, vec![0, 1, 2, 3]);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_bounded_by_exact() {
        let bundle = build_counterexample(2).unwrap();
        let a = &bundle.matrix;
        let first = ric_lower_bound_mc(a, 2, 100, 42).unwrap();
        let second = ric_lower_bound_mc(a, 2, 100, 42).unwrap();
        assert_eq!(first.delta, second.delta);
        assert_eq!(first.worst_support, second.worst_support);

        let exact = ric_exact_default(a, 2).unwrap();
        assert!(first.delta <= exact.delta + 1e-15);
    }

    #[test]
    fn order_and_cap_checks() {
        let a = DenseMatrix::identity(4);
        assert!(matches!(
            ric_exact_default(&a, 0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            ric_exact_default(&a, 5),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            ric_exact(&a, 2, 3),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert!(matches!(
            ric_lower_bound_mc(&a, 2, 0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn delta_one_equals_worst_column_norm_deviation() {
        let a = DenseMatrix::new(
            2,
            3,
            vec![1.0, 0.0, 0.5, 0.0, 0.8, 0.5],
        )
        .unwrap();
        let report = ric_exact_default(&a, 1).unwrap();
        let direct = (0..3)
            .map(|j| {
                let col = a.column(j);
                let sq: f64 = col.iter().map(|x| x * x).sum();
                (sq - 1.0).abs()
            })
            .fold(0.0_f64, f64::max);
        assert!((report.delta - direct).abs() <= 1e-12);
    }
}
