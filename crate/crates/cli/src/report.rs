//! JSON shapes for the machine-readable artifacts. Every struct serializes
//! with fields in declaration order and uses vectors rather than maps, so a
//! given run always produces byte-identical documents.

use ptxlap::diagnostics::{
    ContractionReport, DecayFit, LedgerReport, MaxPrincipleReport, SmoothingReport,
};
use ptxlap::exponent::LogHolderEstimate;
use serde::Serialize;

#[derive(Serialize)]
pub struct CheckEntry {
    pub name: String,
    /// `pass`, `warn`, or `fail`.
    pub status: String,
    pub detail: String,
}

impl CheckEntry {
    pub fn new(name: &str, status: &str, detail: impl Into<String>) -> Self {
        CheckEntry { name: name.to_string(), status: status.to_string(), detail: detail.into() }
    }
}

#[derive(Serialize)]
pub struct WorstPairEntry {
    pub t_a: f64,
    pub x_a: Vec<f64>,
    pub t_b: f64,
    pub x_b: Vec<f64>,
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Serialize)]
pub struct LogHolderEntry {
    pub c1_hat: f64,
    pub pairs_evaluated: usize,
    pub worst: Option<WorstPairEntry>,
}

impl LogHolderEntry {
    pub fn from_estimate(est: &LogHolderEstimate<f64>, dim: usize) -> Self {
        LogHolderEntry {
            c1_hat: est.c1_hat,
            pairs_evaluated: est.pairs_evaluated,
            worst: est.worst.as_ref().map(|w| WorstPairEntry {
                t_a: w.t_a,
                x_a: w.x_a[..dim].to_vec(),
                t_b: w.t_b,
                x_b: w.x_b[..dim].to_vec(),
                distance: w.distance,
                ratio: w.ratio,
            }),
        }
    }
}

/// Written by `validate` to stdout.
#[derive(Serialize)]
pub struct ValidationReport {
    /// `valid` or `invalid`.
    pub status: String,
    pub p_minus: Option<f64>,
    pub p_plus: Option<f64>,
    pub log_holder: Option<LogHolderEntry>,
    pub checks: Vec<CheckEntry>,
}

#[derive(Serialize)]
pub struct ContractionEntry {
    pub r: String,
    pub pairs_checked: usize,
    pub worst_excess: f64,
    pub pass: bool,
}

impl ContractionEntry {
    pub fn from_report(rep: &ContractionReport<f64>) -> Self {
        ContractionEntry {
            r: rep.r.to_string(),
            pairs_checked: rep.pairs_checked,
            worst_excess: rep.worst_excess,
            pass: rep.pass,
        }
    }
}

#[derive(Serialize)]
pub struct MaxPrincipleEntry {
    pub pairs_checked: usize,
    pub worst_growth: f64,
    pub pass: bool,
}

impl MaxPrincipleEntry {
    pub fn from_report(rep: &MaxPrincipleReport<f64>) -> Self {
        MaxPrincipleEntry {
            pairs_checked: rep.pairs_checked,
            worst_growth: rep.worst_growth,
            pass: rep.pass,
        }
    }
}

#[derive(Serialize)]
pub struct LedgerEntry {
    pub r0: f64,
    pub steps: usize,
    pub worst_residual: f64,
    pub pass: bool,
}

impl LedgerEntry {
    pub fn from_report(rep: &LedgerReport<f64>) -> Self {
        let worst = rep.rows.iter().map(|row| row.residual).fold(f64::NEG_INFINITY, f64::max);
        LedgerEntry {
            r0: rep.r0,
            steps: rep.rows.len(),
            worst_residual: if rep.rows.is_empty() { 0.0 } else { worst },
            pass: rep.pass,
        }
    }
}

#[derive(Serialize)]
pub struct ContinuityEntry {
    pub window: f64,
    pub checked: usize,
    pub worst_value: f64,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct NormEntry {
    pub r: String,
    pub value: f64,
}

#[derive(Serialize)]
pub struct StepsSummary {
    pub count: usize,
    pub max_inner_iterations: usize,
    pub worst_grad_norm: f64,
}

/// Written by `solve` as `summary.json`.
#[derive(Serialize)]
pub struct SummaryReport {
    /// `ok` or `aborted`.
    pub status: String,
    /// Flat configuration text that reproduces this run.
    pub resolved_config: String,
    pub final_time: Option<f64>,
    pub final_norms: Vec<NormEntry>,
    pub steps: Option<StepsSummary>,
    pub contraction: Vec<ContractionEntry>,
    pub max_principle: Option<MaxPrincipleEntry>,
    pub ledger: Option<LedgerEntry>,
    pub continuity: Option<ContinuityEntry>,
    pub ladder: Option<LadderSummary>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct LadderRungEntry {
    pub mu: f64,
    pub nu: f64,
    pub dir: String,
}

#[derive(Serialize)]
pub struct LadderSummary {
    pub rungs: Vec<LadderRungEntry>,
    /// `diff[k]` is the distance between rungs `k` and `k+1` at the horizon.
    pub diffs_at_horizon: Vec<f64>,
    pub strictly_decreasing_at_horizon: bool,
}

#[derive(Serialize)]
pub struct FitEntry {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl FitEntry {
    pub fn from_fit(fit: &DecayFit<f64>) -> Self {
        FitEntry {
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            points: fit.points,
        }
    }
}

#[derive(Serialize)]
pub struct SmoothingRowEntry {
    pub t: f64,
    pub value: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Serialize)]
pub struct RateTargetEntry {
    pub r: String,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub fitted_c: f64,
    pub fit: FitEntry,
    pub rows: Vec<SmoothingRowEntry>,
}

impl RateTargetEntry {
    pub fn from_parts(r: String, smoothing: &SmoothingReport<f64>, fit: &DecayFit<f64>) -> Self {
        RateTargetEntry {
            r,
            gamma_minus: smoothing.gamma.gamma_minus,
            gamma_plus: smoothing.gamma.gamma_plus,
            fitted_c: smoothing.fitted_c,
            fit: FitEntry::from_fit(fit),
            rows: smoothing
                .rows
                .iter()
                .map(|row| SmoothingRowEntry {
                    t: row.t,
                    value: row.value,
                    envelope: row.envelope,
                    ratio: row.ratio,
                })
                .collect(),
        }
    }
}

/// Written by `rates` as `rates.json`.
#[derive(Serialize)]
pub struct RatesReport {
    pub resolved_config: String,
    pub r0: String,
    pub fit_window: [f64; 2],
    pub targets: Vec<RateTargetEntry>,
}

#[derive(Serialize)]
pub struct ProbeEntry {
    pub pairing: f64,
    pub defect: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub residual: f64,
    pub term_pairing: f64,
    pub term_initial: f64,
    pub term_defect: f64,
    pub probes: Vec<ProbeEntry>,
    pub probes_pass: bool,
}

/// Written by `adjoint` as `adjoint.json`.
#[derive(Serialize)]
pub struct AdjointReport {
    pub resolved_config: String,
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    pub r0: String,
    pub sweep: Vec<SweepEntry>,
}
