//! Config-driven experiment drivers behind the CLI: the recovery-rate sweep
//! over a random ensemble and the lemma verification suites.
//!
//! Reports are reproducible: every random draw is seeded through
//! [`crate::seed::mix`] from the config's master seed, and the JSON
//! serialization is deterministic (the optional timestamp is the only
//! nondeterministic field, and the CLI can omit it).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{self, Ensemble, ValueDistribution};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Vector};
use crate::omp::{SparseSignal, TieBreakRule};
use crate::ric::{binomial, ric_lower_bound_mc, DEFAULT_ENUMERATION_CAP};
use crate::seed;
use crate::sharpness::{
    self, certified_below_threshold, lemma2_margin, recovery_threshold, tie_parameter,
    LemmaOneInstance, Sign, TrialSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

fn default_true() -> bool {
    true
}

fn default_patterns() -> usize {
    3
}

fn default_signal_trials() -> usize {
    50
}

fn default_mc_delta_trials() -> u64 {
    1000
}

fn default_tie_break() -> TieBreakRule {
    TieBreakRule::LowestIndex
}

/// Configuration of a recovery-rate sweep.
///
/// `sparsity <= cols` is the only shape constraint: square and even tall
/// instances with `rows = cols = sparsity + 1` are exactly the boundary
/// instances worth sweeping, so `sparsity <= rows <= cols` is deliberately
/// not required.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub sparsity: usize,
    pub ensemble: Ensemble,
    pub normalize_columns: bool,
    /// Number of matrices drawn from the ensemble.
    pub trials: usize,
    /// Echoed into the report; the sweep itself always exercises all three
    /// tie-break rules per trial signal.
    #[serde(default = "default_tie_break")]
    pub tie_break: TieBreakRule,
    pub output_format: OutputFormat,
    /// Enumerate all supports per matrix (with `patterns` value patterns
    /// each) when feasible; otherwise sample `signal_trials` random signals.
    #[serde(default = "default_true")]
    pub exhaustive: bool,
    #[serde(default = "default_patterns")]
    pub patterns: usize,
    #[serde(default = "default_signal_trials")]
    pub signal_trials: usize,
    #[serde(default)]
    pub value_distribution: ValueDistribution,
    /// Support samples for the Monte Carlo constant when exact enumeration
    /// exceeds the cap.
    #[serde(default = "default_mc_delta_trials")]
    pub mc_delta_trials: u64,
}

/// One matrix of the sweep: its constant, whether the guarantee applies, and
/// the observed recovery rate over all (signal, rule) runs.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryRateRow {
    pub matrix_index: usize,
    pub matrix_seed: u64,
    pub delta_s_plus_1: f64,
    pub delta_is_exact: bool,
    pub threshold: f64,
    /// Exact constant strictly below the threshold. Never claimed off a
    /// Monte Carlo lower bound.
    pub condition_satisfied: bool,
    pub recovery_rate: f64,
    pub trials: usize,
    pub failures: usize,
    /// Guarantee certified yet some run failed: a build-breaking bug.
    pub theorem1_violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub package: &'static str,
    pub version: &'static str,
    pub report_schema: u32,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            report_schema: 1,
        }
    }
}

/// The sweep report envelope: `{ config, results, versions }` plus an
/// optional timestamp (unix seconds).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub results: Vec<RecoveryRateRow>,
    pub versions: Versions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl ExperimentReport {
    pub fn any_violation(&self) -> bool {
        self.results.iter().any(|r| r.theorem1_violation)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "matrix_index,matrix_seed,delta_s_plus_1,delta_is_exact,threshold,\
             condition_satisfied,recovery_rate,trials,failures,theorem1_violation\n",
        );
        for r in &self.results {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.matrix_index,
                r.matrix_seed,
                crate::io::format_f64(r.delta_s_plus_1),
                r.delta_is_exact,
                crate::io::format_f64(r.threshold),
                r.condition_satisfied,
                crate::io::format_f64(r.recovery_rate),
                r.trials,
                r.failures,
                r.theorem1_violation,
            ));
        }
        out
    }
}

/// Run the configured sweep: draw `trials` matrices, compute the constant of
/// order `sparsity + 1` (exact when enumerable, Monte Carlo otherwise), and
/// pursue trial signals under all three tie-break rules.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = config.sparsity;
    if s == 0 || s > config.cols {
        return Err(Error::InvalidOrder {
            s,
            cols: config.cols,
        });
    }
    if s > config.rows {
        // The pursuit runs s iterations and each adds one column to the
        // least-squares subproblem, so more iterations than rows cannot work.
        return Err(Error::InvalidArgument(format!(
            "sparsity {} exceeds rows {}; the pursuit cannot run that many iterations",
            s, config.rows
        )));
    }

    let exact_feasible = binomial(config.cols, s + 1) <= DEFAULT_ENUMERATION_CAP as u128
        && s + 1 <= config.cols;
    let exhaustive_signals = config.exhaustive
        && binomial(config.cols, s).saturating_mul(config.patterns as u128)
            <= DEFAULT_ENUMERATION_CAP as u128;

    let mut results = Vec::with_capacity(config.trials);
    for index in 0..config.trials {
        let matrix_seed = seed::mix(config.master_seed, index as u64);
        let a = ensemble::gen_matrix(
            config.ensemble,
            config.rows,
            config.cols,
            matrix_seed,
            config.normalize_columns,
        );
        let trial_spec = TrialSpec {
            exhaustive: exhaustive_signals,
            distribution: config.value_distribution,
            trials: if exhaustive_signals {
                config.patterns
            } else {
                config.signal_trials
            },
            seed: seed::mix(matrix_seed, 2),
        };

        let row = if exact_feasible {
            let report = sharpness::theorem1_sweep(&a, s, &trial_spec)?;
            RecoveryRateRow {
                matrix_index: index,
                matrix_seed,
                delta_s_plus_1: report.delta,
                delta_is_exact: true,
                threshold: report.threshold,
                condition_satisfied: report.condition_holds,
                recovery_rate: report.recovery_rate(),
                trials: report.total_runs,
                failures: report.failures.len(),
                theorem1_violation: report.theorem1_violated(),
            }
        } else {
            // Enumeration is out of reach: report a Monte Carlo lower bound
            // and never claim the guarantee.
            let mc = ric_lower_bound_mc(&a, s + 1, config.mc_delta_trials, seed::mix(matrix_seed, 1))?;
            let signals: Vec<SparseSignal> = (0..config.signal_trials)
                .map(|t| {
                    ensemble::gen_sparse_signal(
                        config.cols,
                        s,
                        seed::mix(trial_spec.seed, t as u64),
                        config.value_distribution,
                    )
                })
                .collect::<Result<_>>()?;
            let (total, recovered, failures) =
                sharpness::pursue_signals(&a, s, &signals, trial_spec.seed)?;
            RecoveryRateRow {
                matrix_index: index,
                matrix_seed,
                delta_s_plus_1: mc.delta,
                delta_is_exact: false,
                threshold: recovery_threshold(s),
                condition_satisfied: false,
                recovery_rate: if total == 0 {
                    1.0
                } else {
                    recovered as f64 / total as f64
                },
                trials: total,
                failures: failures.len(),
                theorem1_violation: false,
            }
        };
        results.push(row);
    }

    Ok(ExperimentReport {
        config: config.clone(),
        results,
        versions: Versions::current(),
        timestamp: None,
    })
}

/// Combined result of the identity and dominance suites.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuiteReport {
    pub s_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Worst identity defect divided by its instance scale `1 + ||Ax||^2`.
    pub max_identity_residual: f64,
    pub identity_bound: f64,
    pub identity_pass: bool,
    /// Worst closed-form defect of the tie parameter over s = 1..=s_max.
    pub max_t_algebra_defect: f64,
    pub t_algebra_pass: bool,
    /// Smallest dominance margin over certified random instances.
    pub min_dominance_margin: f64,
    pub certified_matrices: usize,
    pub margins_checked: usize,
    pub dominance_pass: bool,
    pub all_pass: bool,
}

/// Identity residual suite, dominance margin suite, and the tie-parameter
/// closed forms, over `trials` random instances per sparsity and sign.
pub fn run_lemma_suite(s_max: usize, trials: usize, master_seed: u64) -> Result<LemmaSuiteReport> {
    if s_max == 0 || trials == 0 {
        return Err(Error::InvalidArgument(
            "lemma suite needs s_max >= 1 and trials >= 1".into(),
        ));
    }

    // Identity suite: random dense instances, both signs.
    let identity_bound = 1e-10;
    let mut max_identity_residual = 0.0_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(master_seed, 0));
    for s in 1..=s_max {
        for sign in Sign::BOTH {
            for _ in 0..trials {
                let m = rng.random_range(4..9);
                let n = rng.random_range(4..11);
                let a = DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
                let x =
                    Vector::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
                let k = rng.random_range(0..n);
                let ax = a.matvec(x.as_slice())?;
                let scale = 1.0 + ax.iter().map(|v| v * v).sum::<f64>();
                let inst = LemmaOneInstance::new(s, sign, k, x, a)?;
                let defect = sharpness::lemma1_residual(&inst)? / scale;
                max_identity_residual = max_identity_residual.max(defect);
            }
        }
    }
    let identity_pass = max_identity_residual <= identity_bound;

    // Closed forms of the tie parameter.
    let mut max_t_algebra_defect = 0.0_f64;
    for s in 1..=s_max {
        let sf = s as f64;
        for sign in Sign::BOTH {
            let t = tie_parameter(s, sign);
            let d1 = ((1.0 - t * t) / (1.0 + t * t) - 1.0 / (sf + 1.0).sqrt()).abs();
            let d2 = (2.0 * t / (1.0 - t * t) - sign.value() * sf.sqrt()).abs();
            max_t_algebra_defect = max_t_algebra_defect.max(d1).max(d2);
        }
    }
    let t_algebra_pass = max_t_algebra_defect <= 1e-12;

    // Dominance suite: random certified matrices, random prefix-supported
    // signals, margins must be strictly positive.
    let mut min_dominance_margin = f64::INFINITY;
    let mut certified_matrices = 0;
    let mut margins_checked = 0;
    for trial in 0..trials {
        let matrix_seed = seed::mix(master_seed, 1 + trial as u64);
        let mut inst_rng = ChaCha8Rng::seed_from_u64(matrix_seed);
        let s = inst_rng.random_range(1..=3usize);
        let cols = inst_rng.random_range((s + 2)..=10usize);
        let a = ensemble::gen_gaussian_matrix(20, cols, matrix_seed, true);
        let delta = crate::ric::ric_exact_default(&a, s + 1)?.delta;
        if !certified_below_threshold(delta, s) {
            continue;
        }
        certified_matrices += 1;
        for signal_idx in 0..10u64 {
            let sparsity = 1 + (signal_idx as usize % s);
            let prefix = ensemble::gen_sparse_signal(
                s,
                sparsity,
                seed::mix(matrix_seed, 100 + signal_idx),
                ValueDistribution::Mixed,
            )?;
            let x = SparseSignal::new(cols, prefix.support().to_vec(), prefix.values().to_vec())?;
            let margin = lemma2_margin(&a, s, &x)?;
            min_dominance_margin = min_dominance_margin.min(margin);
            margins_checked += 1;
        }
    }
    let dominance_pass = margins_checked > 0 && min_dominance_margin > 0.0;

    Ok(LemmaSuiteReport {
        s_max,
        trials,
        seed: master_seed,
        max_identity_residual,
        identity_bound,
        identity_pass,
        max_t_algebra_defect,
        t_algebra_pass,
        min_dominance_margin,
        certified_matrices,
        margins_checked,
        dominance_pass,
        all_pass: identity_pass && t_algebra_pass && dominance_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 7,
            rows: 12,
            cols: 6,
            sparsity: 2,
            ensemble: Ensemble::Gaussian,
            normalize_columns: true,
            trials: 4,
            tie_break: TieBreakRule::LowestIndex,
            output_format: OutputFormat::Json,
            exhaustive: true,
            patterns: 3,
            signal_trials: 20,
            value_distribution: ValueDistribution::Mixed,
            mc_delta_trials: 100,
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let config = small_config();
        let first = run_experiment(&config).unwrap();
        let second = run_experiment(&config).unwrap();
        assert_eq!(first.to_json(), second.to_json());
        assert_eq!(first.results.len(), 4);
        assert!(!first.any_violation());
    }

    #[test]
    fn certified_rows_recover_everything() {
        let report = run_experiment(&small_config()).unwrap();
        for row in &report.results {
            assert!(row.delta_is_exact);
            if row.condition_satisfied {
                assert_eq!(row.recovery_rate, 1.0, "row {row:?}");
                assert_eq!(row.failures, 0);
            }
        }
    }

    #[test]
    fn infeasible_enumeration_falls_back_to_monte_carlo() {
        let mut config = small_config();
        // C(150, 4) > 2e7 overflows the enumeration cap.
        config.cols = 150;
        config.rows = 20;
        config.sparsity = 3;
        config.trials = 1;
        config.signal_trials = 5;
        config.mc_delta_trials = 20;
        let report = run_experiment(&config).unwrap();
        let row = &report.results[0];
        assert!(!row.delta_is_exact);
        assert!(!row.condition_satisfied);
        assert!(row.trials > 0);
    }

    #[test]
    fn csv_rendering_has_header_and_rows() {
        let mut config = small_config();
        config.trials = 2;
        let report = run_experiment(&config).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("matrix_index,matrix_seed,delta_s_plus_1"));
    }

    #[test]
    fn config_rejects_bad_shapes() {
        let mut config = small_config();
        config.sparsity = 0;
        assert!(run_experiment(&config).is_err());
        let mut config = small_config();
        config.sparsity = 7;
        assert!(run_experiment(&config).is_err());
        let mut config = small_config();
        config.rows = 1;
        assert!(run_experiment(&config).is_err());
    }

    #[test]
    fn lemma_suite_passes_at_small_scale() {
        let report = run_lemma_suite(4, 30, 11).unwrap();
        assert!(report.identity_pass, "{report:?}");
        assert!(report.t_algebra_pass, "{report:?}");
        assert!(report.dominance_pass, "{report:?}");
        assert!(report.all_pass);
        assert!(report.certified_matrices > 0);
    }
}
