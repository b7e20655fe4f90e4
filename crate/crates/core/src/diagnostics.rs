//! Quantitative checks that turn a computed evolution into verdicts.
//!
//! The checks fall into three groups. Structure checks (`contraction_check`,
//! `max_principle_check`, `energy_inequality_ledger`) certify properties the
//! discrete flow is supposed to satisfy exactly, up to inner-solver slack.
//! Decay checks (`gamma_exponents`, `smoothing_bound_check`, `decay_fit`,
//! `continuity_check`) compare norm histories against the predicted
//! time-decay envelopes. `rate_stability` summarizes how the fitted envelope
//! constant behaves across mesh resolutions.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::{discrete_gradient, Grid};
use crate::norms::{lp_norm, NormRecord, RExp};
use crate::scalar::{cast, Scalar};

/// The pair of decay rates governing the smoothing envelope
/// `t^(-gamma_minus) + t^(-gamma_plus)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPair<T: Scalar> {
    pub gamma_minus: T,
    pub gamma_plus: T,
}

/// Decay rates for the norm gain from exponent `r0` to `r` in `dim` space
/// dimensions, with exponent bounds `p_minus <= p_plus`.
///
/// Admissibility is gated hard: the source exponent must be finite and at
/// least 2, the target at least the source, and `p_minus > 2 dim / (dim + r0)`
/// (otherwise the decay hypothesis fails). The closed formulas implemented
/// here additionally need `p_minus >= dim` for finite targets and
/// `p_minus > dim` for the sup-norm target; outside that window the regime is
/// reported as unsupported rather than extrapolated.
pub fn gamma_exponents<T: Scalar>(
    dim: usize,
    r0: RExp<T>,
    r: RExp<T>,
    p_minus: T,
    p_plus: T,
) -> Result<GammaPair<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(p_minus > T::one()) || p_plus < p_minus {
        return Err(Error::InvalidExponent(format!(
            "need 1 < p_minus <= p_plus, got [{p_minus}, {p_plus}]"
        )));
    }
    let n = cast::<T>(dim as f64);
    let two = cast::<T>(2.0);
    let r0v = match r0.finite() {
        Some(v) if v >= two => v,
        Some(v) => {
            return Err(Error::InvalidArgument(format!("source exponent must be >= 2, got {v}")))
        }
        None => {
            return Err(Error::InvalidArgument(
                "source exponent must be finite for decay rates".into(),
            ))
        }
    };
    if let Some(rv) = r.finite() {
        if rv < r0v {
            return Err(Error::InvalidArgument(format!(
                "target exponent {rv} below source exponent {r0v}"
            )));
        }
    }
    let threshold = two * n / (n + r0v);
    if !(p_minus > threshold) {
        return Err(Error::HypothesisViolated(format!(
            "decay needs p_minus > 2 dim / (dim + r0) = {threshold}, got {p_minus}"
        )));
    }
    match r {
        RExp::Finite(_) if p_minus < n => {
            return Err(Error::UnsupportedRegime(format!(
                "finite-target decay formula needs p_minus >= dim, got {p_minus} < {n}"
            )));
        }
        RExp::Inf if p_minus <= n => {
            return Err(Error::UnsupportedRegime(format!(
                "sup-norm decay needs p_minus > dim, got {p_minus} <= {n}"
            )));
        }
        _ => {}
    }
    let denom = r0v * p_minus - two * n + n * p_minus;
    let pair = match r {
        RExp::Inf => GammaPair {
            gamma_minus: n / denom,
            gamma_plus: n * p_minus / (p_plus * denom),
        },
        RExp::Finite(rv) => GammaPair {
            gamma_minus: (rv - r0v) * n / (rv * denom),
            gamma_plus: (rv - r0v) * n * p_minus / (rv * p_plus * denom),
        },
    };
    if !pair.gamma_minus.is_finite() || !pair.gamma_plus.is_finite() {
        return Err(Error::NonFinite("decay rates".into()));
    }
    Ok(pair)
}

/// Verdict on monotone decrease of one norm history.
#[derive(Debug, Clone)]
pub struct ContractionReport<T: Scalar> {
    pub r: RExp<T>,
    pub pairs_checked: usize,
    /// Largest relative excess of a value over the running minimum.
    pub worst_excess: T,
    /// Times of the offending (minimum, excess) pair, when any.
    pub worst_pair: Option<[T; 2]>,
    pub pass: bool,
}

/// Checks that each norm history is nonincreasing in time up to a relative
/// tolerance, one report per distinct norm exponent. Values are compared
/// against the running minimum so slow drift cannot hide under pairwise slack.
pub fn contraction_check<T: Scalar>(
    records: &[NormRecord<T>],
    rel_tol: T,
) -> Result<Vec<ContractionReport<T>>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no norm records to check".into()));
    }
    if !(rel_tol >= T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
    }
    let mut sorted: Vec<&NormRecord<T>> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.r, a.t)
            .partial_cmp(&(b.r, b.t))
            .expect("norm records are finite and comparable")
    });
    let mut reports: Vec<ContractionReport<T>> = Vec::new();
    let mut idx = 0;
    while idx < sorted.len() {
        let r = sorted[idx].r;
        let mut run_min = sorted[idx].value;
        let mut run_min_t = sorted[idx].t;
        let mut report = ContractionReport {
            r,
            pairs_checked: 0,
            worst_excess: T::zero(),
            worst_pair: None,
            pass: true,
        };
        idx += 1;
        while idx < sorted.len() && sorted[idx].r == r {
            let rec = sorted[idx];
            if !rec.value.is_finite() {
                return Err(Error::NonFinite(format!("norm record at t = {}", rec.t)));
            }
            let scale = T::one().max(run_min);
            let excess = (rec.value - run_min) / scale;
            if excess > report.worst_excess {
                report.worst_excess = excess;
                report.worst_pair = Some([run_min_t, rec.t]);
            }
            report.pairs_checked += 1;
            if rec.value < run_min {
                run_min = rec.value;
                run_min_t = rec.t;
            }
            idx += 1;
        }
        report.pass = report.worst_excess <= rel_tol;
        reports.push(report);
    }
    Ok(reports)
}

/// Verdict on the discrete maximum principle along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct MaxPrincipleReport<T: Scalar> {
    pub pairs_checked: usize,
    /// Largest absolute growth of the sup norm across one stored interval.
    pub worst_growth: T,
    pub worst_time: Option<T>,
    pub pass: bool,
}

/// Checks that the componentwise modulus never grows in the sup norm between
/// stored states, up to an absolute slack covering inner-solver error.
pub fn max_principle_check<T: Scalar>(
    grid: &Grid<T>,
    traj: &Trajectory<T>,
    slack: T,
) -> Result<MaxPrincipleReport<T>> {
    if traj.snapshots.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let mut report = MaxPrincipleReport {
        pairs_checked: 0,
        worst_growth: T::zero(),
        worst_time: None,
        pass: true,
    };
    let mut prev = lp_norm(grid, &traj.snapshots[0], RExp::Inf)?;
    for snap in &traj.snapshots[1..] {
        let cur = lp_norm(grid, snap, RExp::Inf)?;
        let growth = cur - prev;
        if growth > report.worst_growth {
            report.worst_growth = growth;
            report.worst_time = Some(snap.time);
        }
        report.pairs_checked += 1;
        prev = cur;
    }
    report.pass = report.worst_growth <= slack;
    Ok(report)
}

/// One step of the energy bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct LedgerRow<T: Scalar> {
    pub step: usize,
    pub time: T,
    /// Discrete derivative of the `r0`-th power of the norm, divided by `r0`.
    pub deriv_term: T,
    /// Nonnegative dissipation functional of the end-of-step state.
    pub dissipation: T,
    /// `deriv_term + dissipation`; the inequality asserts this is at most the
    /// solver slack.
    pub residual: T,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct LedgerReport<T: Scalar> {
    pub r0: T,
    pub tol: T,
    pub rows: Vec<LedgerRow<T>>,
    pub pass: bool,
}

fn weighted_power_sum<T: Scalar>(grid: &Grid<T>, field: &crate::mesh::GridField<T>, r0: T) -> T {
    let nc = grid.components();
    let mut acc = T::zero();
    for node in 0..grid.num_nodes() {
        let m = field.modulus(nc, node);
        acc += grid.node_weight(node) * m.powf(r0);
    }
    acc
}

/// Testing the step equation with `u |u|^(r0-2)` shows that the decrease of
/// `|u|_(r0)^(r0) / r0` per unit time dominates a nonnegative dissipation
/// functional: flux coefficient times squared gradient times the corner
/// average of `|u|^(r0-2)`, summed over cells. This audit recomputes both
/// sides for every step of a dense trajectory; each row must come out
/// nonpositive up to slack proportional to the stopping threshold.
pub fn energy_inequality_ledger<T: Scalar>(
    grid: &Grid<T>,
    traj: &Trajectory<T>,
    p_field: &ExponentField<T>,
    r0: T,
    tol: T,
) -> Result<LedgerReport<T>> {
    if !traj.dense {
        return Err(Error::DenseRequired("energy ledger".into()));
    }
    if !(r0 >= cast::<T>(2.0)) {
        return Err(Error::InvalidArgument(format!("ledger norm exponent must be >= 2, got {r0}")));
    }
    if traj.num_steps == 0 {
        return Err(Error::InvalidArgument("trajectory has no steps".into()));
    }
    let two = cast::<T>(2.0);
    let mu = traj.params.mu;
    let nu = traj.params.nu;
    let tau = traj.params.tau;
    let nc = grid.components();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let mut rows = Vec::with_capacity(traj.num_steps);
    let mut pass = true;
    let mut prev_power = weighted_power_sum(grid, traj.state_at_step(0)?, r0);
    for k in 1..=traj.num_steps {
        let state = traj.state_at_step(k)?;
        let power = weighted_power_sum(grid, state, r0);
        let deriv_term = (power - prev_power) / (r0 * tau);
        let p_cells = crate::dynamics::sample_cell_exponents(grid, p_field, state.time)?;
        let g = discrete_gradient(grid, state)?;
        let mut dissipation = T::zero();
        for cell in 0..grid.num_cells() {
            let s = g.modulus_squared(grid, cell);
            let p = p_cells[cell];
            let coeff = if p == two {
                nu + T::one()
            } else {
                nu + (mu + s).powf((p - two) / two)
            };
            let (c1, c2) = grid.cell_multi(cell);
            let mut avg = state.modulus(nc, grid.node_index(c1, c2))
                + state.modulus(nc, grid.node_index(c1 + 1, c2));
            let corners = if dim == 1 {
                two
            } else {
                avg = avg
                    + state.modulus(nc, grid.node_index(c1, c2 + 1))
                    + state.modulus(nc, grid.node_index(c1 + 1, c2 + 1));
                cast::<T>(4.0)
            };
            avg /= corners;
            let weight = if r0 == two { T::one() } else { avg.powf(r0 - two) };
            dissipation += vol * coeff * s * weight;
        }
        let residual = deriv_term + dissipation;
        if !residual.is_finite() {
            return Err(Error::NonFinite(format!("ledger row {k}")));
        }
        let row_pass = residual <= tol * (T::one() + prev_power / tau);
        pass = pass && row_pass;
        rows.push(LedgerRow {
            step: k,
            time: state.time,
            deriv_term,
            dissipation,
            residual,
            pass: row_pass,
        });
        prev_power = power;
    }
    Ok(LedgerReport { r0, tol, rows, pass })
}

/// One record compared against the decay envelope.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingRow<T: Scalar> {
    pub t: T,
    pub value: T,
    /// `t^(-gamma_minus) + t^(-gamma_plus)`.
    pub envelope: T,
    pub ratio: T,
}

#[derive(Debug, Clone)]
pub struct SmoothingReport<T: Scalar> {
    pub gamma: GammaPair<T>,
    /// Smallest envelope multiple dominating every record.
    pub fitted_c: T,
    pub rows: Vec<SmoothingRow<T>>,
}

/// Fits the smallest constant `c` with `value(t) <= c (t^-gm + t^-gp)` over
/// the given history. All times must be positive.
pub fn smoothing_bound_check<T: Scalar>(
    records: &[NormRecord<T>],
    gamma: GammaPair<T>,
) -> Result<SmoothingReport<T>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records for the envelope fit".into()));
    }
    let mut rows = Vec::with_capacity(records.len());
    let mut fitted_c = T::zero();
    for rec in records {
        if !(rec.t > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "envelope fit needs positive times, got {}",
                rec.t
            )));
        }
        if !rec.value.is_finite() {
            return Err(Error::NonFinite(format!("norm record at t = {}", rec.t)));
        }
        let envelope = rec.t.powf(-gamma.gamma_minus) + rec.t.powf(-gamma.gamma_plus);
        let ratio = rec.value / envelope;
        fitted_c = fitted_c.max(ratio);
        rows.push(SmoothingRow { t: rec.t, value: rec.value, envelope, ratio });
    }
    Ok(SmoothingReport { gamma, fitted_c, rows })
}

/// Least-squares power-law fit of a norm history.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit<T: Scalar> {
    /// Slope of `log value` against `log t`.
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub points: usize,
}

/// Ordinary least squares on `(log t, log value)`. Requires at least five
/// positive records; a vanishing norm cannot be fitted and is reported as an
/// error rather than silently dropped.
pub fn decay_fit<T: Scalar>(records: &[NormRecord<T>]) -> Result<DecayFit<T>> {
    if records.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs at least 5 records, got {}",
            records.len()
        )));
    }
    let mut xs = Vec::with_capacity(records.len());
    let mut ys = Vec::with_capacity(records.len());
    for rec in records {
        if !(rec.t > T::zero()) {
            return Err(Error::InvalidArgument("power-law fit needs positive times".into()));
        }
        if !(rec.value > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "norm vanished at t = {}; log-log fit undefined",
                rec.t
            )));
        }
        xs.push(rec.t.ln());
        ys.push(rec.value.ln());
    }
    let nf = cast::<T>(records.len() as f64);
    let mean_x = xs.iter().copied().sum::<T>() / nf;
    let mean_y = ys.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (*x - mean_x) * (*x - mean_x);
        sxy += (*x - mean_x) * (*y - mean_y);
    }
    if sxx == T::zero() {
        return Err(Error::InvalidArgument("all fit times coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (x, y) in xs.iter().zip(&ys) {
        let pred = intercept + slope * *x;
        ss_res += (*y - pred) * (*y - pred);
        ss_tot += (*y - mean_y) * (*y - mean_y);
    }
    let r_squared = if ss_tot > T::zero() { T::one() - ss_res / ss_tot } else { T::one() };
    Ok(DecayFit { slope, intercept, r_squared, points: records.len() })
}

/// Verdict on initial-time continuity of a difference history.
#[derive(Debug, Clone, Copy)]
pub struct ContinuityReport<T: Scalar> {
    pub checked: usize,
    pub worst_value: T,
    pub worst_time: Option<T>,
    pub pass: bool,
}

/// Checks that `|u(t) - u(0)|` stays below `tol * reference_norm` for all
/// records with `t <= t_star`.
pub fn continuity_check<T: Scalar>(
    differences: &[(T, T)],
    reference_norm: T,
    t_star: T,
    tol: T,
) -> Result<ContinuityReport<T>> {
    if !(reference_norm > T::zero()) {
        return Err(Error::InvalidArgument("reference norm must be positive".into()));
    }
    let ceiling = tol * reference_norm;
    let mut report =
        ContinuityReport { checked: 0, worst_value: T::zero(), worst_time: None, pass: true };
    for (t, diff) in differences {
        if *t > t_star {
            continue;
        }
        if !diff.is_finite() {
            return Err(Error::NonFinite(format!("difference at t = {t}")));
        }
        report.checked += 1;
        if *diff > report.worst_value {
            report.worst_value = *diff;
            report.worst_time = Some(*t);
        }
    }
    report.pass = report.worst_value <= ceiling;
    Ok(report)
}

/// Envelope constant fitted at one mesh resolution.
#[derive(Debug, Clone, Copy)]
pub struct ResolutionFit<T: Scalar> {
    /// Cells along the first axis.
    pub cells: usize,
    pub fitted_c: T,
}

/// Ratio of the largest to the smallest fitted constant, and whether it stays
/// under the given factor.
pub fn rate_stability<T: Scalar>(fits: &[ResolutionFit<T>], factor: T) -> Result<(T, bool)> {
    if fits.len() < 2 {
        return Err(Error::InvalidArgument("stability needs at least two resolutions".into()));
    }
    let mut lo = fits[0].fitted_c;
    let mut hi = fits[0].fitted_c;
    for f in fits {
        if !(f.fitted_c > T::zero()) {
            return Err(Error::InvalidArgument("fitted constants must be positive".into()));
        }
        lo = lo.min(f.fitted_c);
        hi = hi.max(f.fitted_c);
    }
    let spread = hi / lo;
    Ok((spread, spread <= factor))
}
