//! Report shapes for user-facing output.
//!
//! Everything here is serializable and uses 1-based indices; the conversion
//! from the library's 0-based indexing happens in exactly one place, the
//! `From` impls below. Field names are lower_snake_case in JSON.

use serde::Serialize;

use crate::io::format_f64;
use crate::omp::OmpTrace;
use crate::ric::RicReport;
use crate::sharpness::{CounterexampleReport, SweepReport};

pub fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|&i| i + 1).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RicReportDto {
    pub order: usize,
    pub delta: f64,
    pub is_exact: bool,
    pub worst_support: Vec<usize>,
    pub worst_eigen_low: f64,
    pub worst_eigen_high: f64,
    pub supports_examined: u64,
}

impl From<&RicReport> for RicReportDto {
    fn from(r: &RicReport) -> Self {
        Self {
            order: r.order,
            delta: r.delta,
            is_exact: r.is_exact,
            worst_support: one_based(&r.worst_support),
            worst_eigen_low: r.worst_eigen_low,
            worst_eigen_high: r.worst_eigen_high,
            supports_examined: r.supports_examined,
        }
    }
}

impl RicReportDto {
    pub fn render_text(&self) -> String {
        let kind = if self.is_exact {
            "exact"
        } else {
            "monte carlo lower bound"
        };
        format!(
            "delta_{} = {} ({kind})\n\
             worst support (1-based): {:?}\n\
             extremal gram eigenvalues: [{}, {}]\n\
             supports examined: {}\n",
            self.order,
            format_f64(self.delta),
            self.worst_support,
            format_f64(self.worst_eigen_low),
            format_f64(self.worst_eigen_high),
            self.supports_examined,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceIterationDto {
    pub iteration: usize,
    pub selected_index: usize,
    pub correlations: Vec<f64>,
    pub tie_set: Vec<usize>,
    pub residual_norm_after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceDto {
    pub iterations: Vec<TraceIterationDto>,
    pub selected: Vec<usize>,
    pub final_estimate: Vec<f64>,
    pub converged: bool,
    /// Present only when the truth signal was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered: Option<bool>,
}

impl TraceDto {
    pub fn new(trace: &OmpTrace, recovered: Option<bool>) -> Self {
        Self {
            iterations: trace
                .iterations
                .iter()
                .enumerate()
                .map(|(k, it)| TraceIterationDto {
                    iteration: k + 1,
                    selected_index: it.selected_index + 1,
                    correlations: it.correlations.clone(),
                    tie_set: one_based(&it.tie_set),
                    residual_norm_after: it.residual_norm_after,
                })
                .collect(),
            selected: one_based(&trace.selected_indices()),
            final_estimate: trace.final_estimate.as_slice().to_vec(),
            converged: trace.converged,
            recovered,
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for it in &self.iterations {
            out.push_str(&format!(
                "iter {}: selected {} | tie set {:?} | residual {}\n",
                it.iteration,
                it.selected_index,
                it.tie_set,
                format_f64(it.residual_norm_after),
            ));
            let corr: Vec<String> = it.correlations.iter().map(|&c| format!("{c:.6}")).collect();
            out.push_str(&format!("        correlations [{}]\n", corr.join(", ")));
        }
        let est: Vec<String> = self.final_estimate.iter().map(|&v| format!("{v:.6}")).collect();
        out.push_str(&format!("estimate [{}]\n", est.join(", ")));
        out.push_str(&format!("converged: {}\n", self.converged));
        if let Some(recovered) = self.recovered {
            out.push_str(&format!("recovered: {recovered}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleDto {
    pub s: usize,
    pub predicted_delta: f64,
    pub measured_delta: f64,
    pub delta_matches: bool,
    pub predicted_spectrum: Vec<f64>,
    pub measured_spectrum: Vec<f64>,
    pub spectrum_matches: bool,
    pub predicted_tie_value: f64,
    pub measured_correlations: Vec<f64>,
    pub ties_match: bool,
    pub first_selected_index: usize,
    pub recovered_after_s_iterations: bool,
    pub omp_fails_under_highest_index: bool,
    pub all_pass: bool,
}

impl CounterexampleDto {
    pub fn new(predicted_delta: f64, predicted_spectrum: &[f64], predicted_tie_value: f64, report: &CounterexampleReport) -> Self {
        Self {
            s: report.s,
            predicted_delta,
            measured_delta: report.measured_delta,
            delta_matches: report.delta_matches,
            predicted_spectrum: predicted_spectrum.to_vec(),
            measured_spectrum: report.measured_spectrum.clone(),
            spectrum_matches: report.spectrum_matches,
            predicted_tie_value,
            measured_correlations: report.measured_correlations.clone(),
            ties_match: report.ties_match,
            first_selected_index: report.first_selected_index + 1,
            recovered_after_s_iterations: report.recovered_after_s_iterations,
            omp_fails_under_highest_index: report.omp_fails_under_highest_index,
            all_pass: report.all_pass(),
        }
    }

    pub fn render_text(&self) -> String {
        let flag = |ok: bool| if ok { "ok" } else { "MISMATCH" };
        format!(
            "tie instance s = {}\n\
             delta    = {} (predicted {}) .. {}\n\
             spectrum = {:?} .. {}\n\
             ties     = {:?} (predicted {:.12}) .. {}\n\
             pursuit  = first pick {} under highest-index, recovered after s iterations: {} .. {}\n\
             all checks pass: {}\n",
            self.s,
            format_f64(self.measured_delta),
            format_f64(self.predicted_delta),
            flag(self.delta_matches),
            self.measured_spectrum,
            flag(self.spectrum_matches),
            self.measured_correlations,
            self.predicted_tie_value,
            flag(self.ties_match),
            self.first_selected_index,
            self.recovered_after_s_iterations,
            flag(self.omp_fails_under_highest_index),
            self.all_pass,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFailureDto {
    pub trial: usize,
    pub rule: String,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReportDto {
    pub delta: f64,
    pub threshold: f64,
    pub condition_holds: bool,
    pub total_runs: usize,
    pub recovered_runs: usize,
    pub recovery_rate: f64,
    pub all_recovered: bool,
    pub theorem1_violated: bool,
    pub failures: Vec<SweepFailureDto>,
}

impl From<&SweepReport> for SweepReportDto {
    fn from(r: &SweepReport) -> Self {
        Self {
            delta: r.delta,
            threshold: r.threshold,
            condition_holds: r.condition_holds,
            total_runs: r.total_runs,
            recovered_runs: r.recovered_runs,
            recovery_rate: r.recovery_rate(),
            all_recovered: r.all_recovered(),
            theorem1_violated: r.theorem1_violated(),
            failures: r
                .failures
                .iter()
                .map(|f| SweepFailureDto {
                    trial: f.trial,
                    rule: f.rule.to_string(),
                    support: one_based(&f.support),
                    values: f.values.clone(),
                    selected: one_based(&f.selected),
                })
                .collect(),
        }
    }
}
