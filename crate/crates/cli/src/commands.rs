//! The four subcommands. Each takes a loaded configuration and returns the
//! process exit code:
//!
//! - `0`: success,
//! - `1`: runtime failure (inner solver stalled, disk full, degenerate data),
//! - `2`: a structural assumption fails for these inputs (exponent reaches 1,
//!   missing regularization, decay hypothesis or supported regime violated),
//! - `3`: malformed or inconsistent input.
//!
//! Progress notes go to stderr and honor `--quiet`; error messages always
//! print. Artifacts are written with deterministic formatting, so rerunning a
//! command on the same configuration reproduces every file byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use ptxlap::adjoint::{duality_norm_bound, reciprocity_residual, solve_adjoint, FrozenCoefficients};
use ptxlap::diagnostics::{
    contraction_check, continuity_check, decay_fit, energy_inequality_ledger, gamma_exponents,
    max_principle_check, smoothing_bound_check, LedgerReport,
};
use ptxlap::dynamics::{continuation_ladder, solve_trajectory};
use ptxlap::exponent::estimate_log_holder;
use ptxlap::io::{write_field_csv, write_norm_records_csv};
use ptxlap::norms::{difference_norms, lp_norm, norm_trajectory, NormRecord};
use ptxlap::{
    AdjointParams, Error, ExponentField, Grid, GridField, RExp, SolveError, Trajectory,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{
    AdjointReport, CheckEntry, ContinuityEntry, ContractionEntry, LadderRungEntry, LadderSummary,
    LedgerEntry, LogHolderEntry, MaxPrincipleEntry, NormEntry, ProbeEntry, RateTargetEntry,
    RatesReport, StepsSummary, SummaryReport, SweepEntry, ValidationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Maps a library error to an exit code by what it says about the inputs.
pub fn classify(e: &Error) -> i32 {
    match e {
        Error::InvalidExponent(_)
        | Error::SingularFlux { .. }
        | Error::HypothesisViolated(_)
        | Error::UnsupportedRegime(_) => EXIT_ASSUMPTION,
        Error::Parse(_) | Error::InvalidArgument(_) | Error::Grid(_) | Error::OutOfDomain(_) => {
            EXIT_CONFIG
        }
        Error::NonFinite(_) | Error::DenseRequired(_) => EXIT_RUNTIME,
    }
}

fn solve_error_code(e: &SolveError<f64>) -> i32 {
    match e {
        SolveError::NonConvergence { .. } => EXIT_RUNTIME,
        SolveError::Invalid(err) => match classify(err) {
            // The inputs were already vetted; mid-run complaints are runtime.
            EXIT_CONFIG => EXIT_RUNTIME,
            code => code,
        },
    }
}

enum CmdErr {
    Core(Error),
    Io(String),
}

impl CmdErr {
    fn code(&self) -> i32 {
        match self {
            CmdErr::Core(e) => classify(e),
            CmdErr::Io(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CmdErr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdErr::Core(e) => write!(f, "{e}"),
            CmdErr::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CmdErr {
    fn from(e: Error) -> Self {
        CmdErr::Core(e)
    }
}

impl From<std::io::Error> for CmdErr {
    fn from(e: std::io::Error) -> Self {
        CmdErr::Io(e.to_string())
    }
}

type CmdResult<V> = std::result::Result<V, CmdErr>;

fn note(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}

fn print_json<V: Serialize>(value: &V) {
    let text = serde_json::to_string_pretty(value).expect("reports hold only plain data");
    println!("{text}");
}

fn write_json_file<V: Serialize>(path: &Path, value: &V) -> CmdResult<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| CmdErr::Io(e.to_string()))?;
    writeln!(f)?;
    Ok(())
}

/// Seed for the exponent-roughness pair sampler; fixed so `validate` output
/// depends on nothing but the configuration.
const LOG_HOLDER_SEED: u64 = 0;

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn cmd_validate(cfg: &RunConfig, _quiet: bool) -> i32 {
    let mut checks: Vec<CheckEntry> = Vec::new();
    let mut exit = EXIT_OK;
    let record_fail = |checks: &mut Vec<CheckEntry>, exit: &mut i32, name: &str, code: i32, detail: String| {
        checks.push(CheckEntry::new(name, "fail", detail));
        if *exit == EXIT_OK {
            *exit = code;
        }
    };

    let field = match cfg.build_exponent() {
        Ok(f) => f,
        Err(e) => {
            record_fail(&mut checks, &mut exit, "exponent-construction", classify(&e), e.to_string());
            let report = ValidationReport {
                status: "invalid".into(),
                p_minus: None,
                p_plus: None,
                log_holder: None,
                checks,
            };
            print_json(&report);
            return exit;
        }
    };
    let (p_minus, p_plus) = (field.p_minus(), field.p_plus());
    checks.push(CheckEntry::new(
        "exponent-bounds",
        "pass",
        format!("1 < {p_minus} <= p <= {p_plus}"),
    ));

    let log_holder = match cfg
        .domain()
        .and_then(|d| estimate_log_holder(&field, &d, cfg.diagnostics.log_holder_pairs, LOG_HOLDER_SEED))
    {
        Ok(est) => {
            checks.push(CheckEntry::new(
                "log-holder-estimate",
                "pass",
                format!("largest sampled modulus ratio {}", est.c1_hat),
            ));
            Some(LogHolderEntry::from_estimate(&est, cfg.grid.dim))
        }
        Err(e) => {
            record_fail(&mut checks, &mut exit, "log-holder-estimate", classify(&e), e.to_string());
            None
        }
    };

    if p_minus < 2.0 && cfg.params.mu == 0.0 {
        record_fail(
            &mut checks,
            &mut exit,
            "regularization",
            EXIT_ASSUMPTION,
            format!("the exponent dips to {p_minus} < 2 while params.mu = 0; the flux is singular"),
        );
    } else {
        checks.push(CheckEntry::new(
            "regularization",
            "pass",
            format!("mu = {} covers the sampled exponent range", cfg.params.mu),
        ));
    }

    for r in &cfg.diagnostics.r_list {
        let name = format!("decay-hypothesis-r-{r}");
        match gamma_exponents(cfg.grid.dim, cfg.diagnostics.r0, *r, p_minus, p_plus) {
            Ok(g) => checks.push(CheckEntry::new(
                &name,
                "pass",
                format!("gamma_minus = {}, gamma_plus = {}", g.gamma_minus, g.gamma_plus),
            )),
            Err(e @ Error::UnsupportedRegime(_)) => {
                checks.push(CheckEntry::new(&name, "warn", e.to_string()));
            }
            Err(e) => record_fail(&mut checks, &mut exit, &name, classify(&e), e.to_string()),
        }
    }

    let status = if checks.iter().any(|c| c.status == "fail") { "invalid" } else { "valid" };
    let report = ValidationReport {
        status: status.into(),
        p_minus: Some(p_minus),
        p_plus: Some(p_plus),
        log_holder,
        checks,
    };
    print_json(&report);
    exit
}

// ---------------------------------------------------------------------------
// shared solve plumbing
// ---------------------------------------------------------------------------

fn build_problem(cfg: &RunConfig) -> CmdResult<(Grid<f64>, ExponentField<f64>, GridField<f64>)> {
    let grid = cfg.build_grid()?;
    let p_field = cfg.build_exponent()?;
    let u0 = cfg.build_initial(&grid)?;
    Ok((grid, p_field, u0))
}

/// Rejects parameter combinations the scheme cannot run. Prints its own
/// message and returns the exit code when the gate fires.
fn gate_assumptions(cfg: &RunConfig, p_minus: f64) -> Option<i32> {
    if p_minus < 2.0 && cfg.params.mu == 0.0 {
        eprintln!(
            "error: the exponent dips to {p_minus} < 2 while params.mu = 0; the flux is singular"
        );
        return Some(EXIT_ASSUMPTION);
    }
    if let Err(e) = cfg.step_params().validate(p_minus) {
        eprintln!("error: {e}");
        return Some(classify(&e));
    }
    None
}

fn write_run_artifacts(
    cfg: &RunConfig,
    grid: &Grid<f64>,
    traj: &Trajectory<f64>,
    records: &[NormRecord<f64>],
    dir: &Path,
) -> CmdResult<()> {
    let mut f = fs::File::create(dir.join("norms.csv"))?;
    write_norm_records_csv(&mut f, records)?;

    let mut f = fs::File::create(dir.join("steps.csv"))?;
    writeln!(f, "step,t,inner_iters,grad_norm,energy")?;
    for st in &traj.stats {
        writeln!(f, "{},{},{},{},{}", st.step, st.time, st.inner_iterations, st.grad_norm, st.energy)?;
    }

    // Requested snapshot times land on the nearest stored step; a time whose
    // step was never reached (aborted run) produces no file.
    for &t_req in &cfg.output.snapshots {
        let best = traj
            .snapshots
            .iter()
            .min_by(|a, b| {
                let da = (a.time - t_req).abs();
                let db = (b.time - t_req).abs();
                da.partial_cmp(&db).expect("snapshot times are finite")
            })
            .expect("trajectories store at least the initial state");
        if (best.time - t_req).abs() <= 0.5000001 * cfg.params.tau {
            let mut f = fs::File::create(dir.join(format!("snapshot_{t_req}.csv")))?;
            write_field_csv(&mut f, grid, best)?;
        }
    }
    Ok(())
}

fn write_ledger_csv(dir: &Path, report: &LedgerReport<f64>) -> CmdResult<()> {
    let mut f = fs::File::create(dir.join("ledger.csv"))?;
    writeln!(f, "step,t,deriv_term,dissipation,residual,pass")?;
    for row in &report.rows {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            row.step, row.time, row.deriv_term, row.dissipation, row.residual, row.pass
        )?;
    }
    Ok(())
}

fn final_norm_entries(
    cfg: &RunConfig,
    grid: &Grid<f64>,
    state: &GridField<f64>,
) -> CmdResult<Vec<NormEntry>> {
    let mut out = Vec::with_capacity(cfg.output.norms.len());
    for r in &cfg.output.norms {
        out.push(NormEntry { r: r.to_string(), value: lp_norm(grid, state, *r)? });
    }
    Ok(out)
}

fn steps_summary(traj: &Trajectory<f64>) -> Option<StepsSummary> {
    if traj.stats.is_empty() {
        return None;
    }
    Some(StepsSummary {
        count: traj.stats.len(),
        max_inner_iterations: traj.stats.iter().map(|s| s.inner_iterations).max().unwrap_or(0),
        worst_grad_norm: traj.stats.iter().map(|s| s.grad_norm).fold(0.0, f64::max),
    })
}

fn aborted_summary(cfg: &RunConfig, message: String) -> SummaryReport {
    SummaryReport {
        status: "aborted".into(),
        resolved_config: cfg.canonical_text(),
        final_time: None,
        final_norms: Vec::new(),
        steps: None,
        contraction: Vec::new(),
        max_principle: None,
        ledger: None,
        continuity: None,
        ladder: None,
        error: Some(message),
    }
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

pub fn cmd_solve(cfg: &RunConfig, quiet: bool) -> i32 {
    match solve_flow(cfg, quiet) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn solve_flow(cfg: &RunConfig, quiet: bool) -> CmdResult<i32> {
    let (grid, p_field, u0) = build_problem(cfg)?;
    if let Some(code) = gate_assumptions(cfg, p_field.p_minus()) {
        return Ok(code);
    }
    fs::create_dir_all(&cfg.output.dir)?;
    if cfg.ladder.is_some() {
        ladder_flow(cfg, &grid, &p_field, &u0, quiet)
    } else {
        single_flow(cfg, &grid, &p_field, &u0, quiet)
    }
}

fn single_flow(
    cfg: &RunConfig,
    grid: &Grid<f64>,
    p_field: &ExponentField<f64>,
    u0: &GridField<f64>,
    quiet: bool,
) -> CmdResult<i32> {
    let params = cfg.step_params();
    note(
        quiet,
        &format!("solving to t = {} in steps of {}", cfg.params.horizon, cfg.params.tau),
    );
    let dir = &cfg.output.dir;
    match solve_trajectory(grid, u0, p_field, &params, cfg.params.horizon, &cfg.output.snapshots, cfg.params.dense)
    {
        Ok(traj) => {
            let records = norm_trajectory(grid, &traj, &cfg.output.norms)?;
            write_run_artifacts(cfg, grid, &traj, &records, dir)?;

            let contraction: Vec<ContractionEntry> =
                contraction_check(&records, cfg.diagnostics.contraction_tol)?
                    .iter()
                    .map(ContractionEntry::from_report)
                    .collect();
            let max_principle = Some(MaxPrincipleEntry::from_report(&max_principle_check(
                grid,
                &traj,
                cfg.diagnostics.max_principle_slack,
            )?));
            let ledger_report = if cfg.diagnostics.ledger {
                let r0 = cfg
                    .diagnostics
                    .r0
                    .finite()
                    .expect("a finite ledger exponent is enforced at load");
                Some(energy_inequality_ledger(grid, &traj, p_field, r0, cfg.diagnostics.ledger_tol)?)
            } else {
                None
            };
            if let Some(rep) = &ledger_report {
                write_ledger_csv(dir, rep)?;
            }
            let continuity = continuity_entry(cfg, grid, &traj)?;

            let summary = SummaryReport {
                status: "ok".into(),
                resolved_config: cfg.canonical_text(),
                final_time: Some(traj.final_state().time),
                final_norms: final_norm_entries(cfg, grid, traj.final_state())?,
                steps: steps_summary(&traj),
                contraction,
                max_principle,
                ledger: ledger_report.as_ref().map(LedgerEntry::from_report),
                continuity,
                ladder: None,
                error: None,
            };
            write_json_file(&dir.join("summary.json"), &summary)?;
            note(quiet, "solve: ok");
            Ok(EXIT_OK)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            let code = solve_error_code(&failure.error);
            let partial = &failure.partial;
            if !partial.snapshots.is_empty() {
                let records = norm_trajectory(grid, partial, &cfg.output.norms)?;
                write_run_artifacts(cfg, grid, partial, &records, dir)?;
            }
            write_json_file(&dir.join("summary.json"), &aborted_summary(cfg, failure.error.to_string()))?;
            note(quiet, "solve: aborted, partial artifacts kept");
            Ok(code)
        }
    }
}

fn continuity_entry(
    cfg: &RunConfig,
    grid: &Grid<f64>,
    traj: &Trajectory<f64>,
) -> CmdResult<Option<ContinuityEntry>> {
    let Some(window) = cfg.diagnostics.continuity_window else {
        return Ok(None);
    };
    let two = RExp::Finite(2.0);
    let reference = lp_norm(grid, traj.initial(), two)?;
    if reference == 0.0 {
        // Nothing to measure against; the zero datum stays zero.
        return Ok(None);
    }
    let diffs = difference_norms(grid, traj, traj.initial(), two)?;
    let rep = continuity_check(&diffs, reference, window, cfg.diagnostics.continuity_tol)?;
    Ok(Some(ContinuityEntry {
        window,
        checked: rep.checked,
        worst_value: rep.worst_value,
        pass: rep.pass,
    }))
}

fn ladder_flow(
    cfg: &RunConfig,
    grid: &Grid<f64>,
    p_field: &ExponentField<f64>,
    u0: &GridField<f64>,
    quiet: bool,
) -> CmdResult<i32> {
    let rungs = cfg.ladder.as_ref().expect("ladder flow runs only with a ladder block");
    let base = cfg.step_params();
    let dir = &cfg.output.dir;
    note(quiet, &format!("running {} regularization rungs", rungs.len()));
    match continuation_ladder(grid, u0, p_field, &base, rungs, cfg.params.horizon, &cfg.output.snapshots)
    {
        Ok(outcome) => {
            let mut rung_entries = Vec::with_capacity(rungs.len());
            for (k, traj) in outcome.trajectories.iter().enumerate() {
                let rung_dir = dir.join(format!("rung_{k}"));
                fs::create_dir_all(&rung_dir)?;
                let records = norm_trajectory(grid, traj, &cfg.output.norms)?;
                write_run_artifacts(cfg, grid, traj, &records, &rung_dir)?;
                rung_entries.push(LadderRungEntry {
                    mu: rungs[k].0,
                    nu: rungs[k].1,
                    dir: format!("rung_{k}"),
                });
            }

            let mut f = fs::File::create(dir.join("ladder.csv"))?;
            writeln!(f, "from,to,t,l2_diff")?;
            for (j, row) in outcome.report.diffs.iter().enumerate() {
                for (t, d) in outcome.report.times.iter().zip(row) {
                    writeln!(f, "{},{},{},{}", j, j + 1, t, d)?;
                }
            }

            let diffs_at_horizon: Vec<f64> = outcome
                .report
                .diffs
                .iter()
                .map(|row| *row.last().expect("every rung stores the final state"))
                .collect();
            let strictly_decreasing = diffs_at_horizon.windows(2).all(|w| w[1] < w[0]);
            let last = outcome.trajectories.last().expect("a ladder has at least two rungs");

            let summary = SummaryReport {
                status: "ok".into(),
                resolved_config: cfg.canonical_text(),
                final_time: Some(last.final_state().time),
                final_norms: final_norm_entries(cfg, grid, last.final_state())?,
                steps: None,
                contraction: Vec::new(),
                max_principle: None,
                ledger: None,
                continuity: None,
                ladder: Some(LadderSummary {
                    rungs: rung_entries,
                    diffs_at_horizon,
                    strictly_decreasing_at_horizon: strictly_decreasing,
                }),
                error: None,
            };
            write_json_file(&dir.join("summary.json"), &summary)?;
            note(quiet, "solve: ladder ok");
            Ok(EXIT_OK)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            let code = solve_error_code(&failure.error);
            write_json_file(&dir.join("summary.json"), &aborted_summary(cfg, failure.error.to_string()))?;
            Ok(code)
        }
    }
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

pub fn cmd_rates(cfg: &RunConfig, quiet: bool) -> i32 {
    match rates_flow(cfg, quiet) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn rates_flow(cfg: &RunConfig, quiet: bool) -> CmdResult<i32> {
    if cfg.diagnostics.r_list.is_empty() {
        eprintln!("error: config error: diagnostics.r_list must name at least one target exponent");
        return Ok(EXIT_CONFIG);
    }
    let (grid, p_field, u0) = build_problem(cfg)?;
    if let Some(code) = gate_assumptions(cfg, p_field.p_minus()) {
        return Ok(code);
    }
    let (p_minus, p_plus) = (p_field.p_minus(), p_field.p_plus());
    let r0 = cfg.diagnostics.r0;

    let mut gammas = Vec::with_capacity(cfg.diagnostics.r_list.len());
    for r in &cfg.diagnostics.r_list {
        match gamma_exponents(cfg.grid.dim, r0, *r, p_minus, p_plus) {
            Ok(g) => gammas.push(g),
            Err(e) => {
                eprintln!("error: target r = {r}: {e}");
                return Ok(classify(&e));
            }
        }
    }

    let [w0, w1] = cfg.diagnostics.fit_window;
    let mut times: Vec<f64> =
        (0..12).map(|i| w0 * (w1 / w0).powf(i as f64 / 11.0)).collect();
    times.extend_from_slice(&cfg.output.snapshots);
    note(quiet, &format!("solving to t = {} for the decay fit on [{w0}, {w1}]", cfg.params.horizon));

    let traj = match solve_trajectory(
        &grid,
        &u0,
        &p_field,
        &cfg.step_params(),
        cfg.params.horizon,
        &times,
        cfg.params.dense,
    ) {
        Ok(t) => t,
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            return Ok(solve_error_code(&failure.error));
        }
    };

    let records = norm_trajectory(&grid, &traj, &cfg.diagnostics.r_list)?;
    let slack = 0.5000001 * cfg.params.tau;
    let mut targets = Vec::with_capacity(gammas.len());
    for (r, gamma) in cfg.diagnostics.r_list.iter().zip(&gammas) {
        let in_window: Vec<NormRecord<f64>> = records
            .iter()
            .filter(|rec| rec.r == *r && rec.t > 0.0 && rec.t >= w0 - slack && rec.t <= w1 + slack)
            .copied()
            .collect();
        let smoothing = smoothing_bound_check(&in_window, *gamma)?;
        let fit = decay_fit(&in_window)?;
        targets.push(RateTargetEntry::from_parts(r.to_string(), &smoothing, &fit));
    }

    let report = RatesReport {
        resolved_config: cfg.canonical_text(),
        r0: r0.to_string(),
        fit_window: cfg.diagnostics.fit_window,
        targets,
    };
    fs::create_dir_all(&cfg.output.dir)?;
    write_json_file(&cfg.output.dir.join("rates.json"), &report)?;
    note(quiet, "rates: ok");
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// adjoint
// ---------------------------------------------------------------------------

pub fn cmd_adjoint(cfg: &RunConfig, quiet: bool) -> i32 {
    match adjoint_flow(cfg, quiet) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn adjoint_flow(cfg: &RunConfig, quiet: bool) -> CmdResult<i32> {
    let Some(block) = &cfg.adjoint else {
        eprintln!("error: config error: this command needs an adjoint block (adjoint.epsilons at minimum)");
        return Ok(EXIT_CONFIG);
    };
    let (grid, p_field, u0) = build_problem(cfg)?;
    if let Some(code) = gate_assumptions(cfg, p_field.p_minus()) {
        return Ok(code);
    }

    note(quiet, &format!("forward solve to t = {}", block.t));
    let forward = match solve_trajectory(
        &grid,
        &u0,
        &p_field,
        &cfg.step_params(),
        block.t,
        &[],
        true,
    ) {
        Ok(t) => t,
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            return Ok(solve_error_code(&failure.error));
        }
    };
    let frozen = FrozenCoefficients::from_trajectory(&grid, &forward, &p_field)?;

    let mut sweep = Vec::with_capacity(block.epsilons.len());
    for &epsilon in &block.epsilons {
        let params = AdjointParams {
            epsilon,
            nu: cfg.params.nu,
            tau: cfg.params.tau,
            inner_tol: cfg.params.inner_tol,
            max_inner_iters: cfg.params.max_inner_iters,
        };
        note(quiet, &format!("backward solve at epsilon = {epsilon}"));
        let backward = match solve_adjoint(&grid, forward.final_state(), &frozen, &params) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(solve_error_code(&e));
            }
        };
        let reciprocity = reciprocity_residual(&grid, &forward, &p_field, &backward)?;
        let duality = duality_norm_bound(
            &grid,
            &forward,
            &p_field,
            &params,
            cfg.diagnostics.r0,
            block.probes,
            block.seed,
        )?;
        sweep.push(SweepEntry {
            epsilon,
            residual: reciprocity.residual,
            term_pairing: reciprocity.term_pairing,
            term_initial: reciprocity.term_initial,
            term_defect: reciprocity.term_defect,
            probes: duality
                .probes
                .iter()
                .map(|p| ProbeEntry { pairing: p.pairing, defect: p.defect, bound: p.bound, ok: p.ok })
                .collect(),
            probes_pass: duality.pass,
        });
    }

    let report = AdjointReport {
        resolved_config: cfg.canonical_text(),
        t: block.t,
        mu: cfg.params.mu,
        nu: cfg.params.nu,
        r0: cfg.diagnostics.r0.to_string(),
        sweep,
    };
    fs::create_dir_all(&cfg.output.dir)?;
    write_json_file(&cfg.output.dir.join("adjoint.json"), &report)?;
    note(quiet, "adjoint: ok");
    Ok(EXIT_OK)
}
