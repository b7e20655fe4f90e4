//! Discrete Lebesgue norms: fixed-exponent `L^r` including `r = inf`, the
//! variable-exponent modular, and the Luxemburg norm it induces.
//!
//! Nodal quantities integrate with trapezoid weights, cell quantities with the
//! midpoint rule, matching the inner products the discrete calculus in
//! [`crate::mesh`] is adjoint under. Component vectors enter through their
//! Euclidean modulus, cell gradients through their Frobenius modulus.

use std::fmt;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::{CellGradient, Grid, GridField};
use crate::scalar::{cast, Scalar};

/// Norm exponent: a finite value in `[1, inf)` or `inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum RExp<T: Scalar> {
    Finite(T),
    Inf,
}

impl<T: Scalar> RExp<T> {
    pub fn parse(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.eq_ignore_ascii_case("inf") {
            return Ok(RExp::Inf);
        }
        let v = trimmed
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("cannot parse norm exponent {trimmed:?}")))?;
        if !v.is_finite() || v < 1.0 {
            return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {v}")));
        }
        Ok(RExp::Finite(cast(v)))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, RExp::Inf)
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            RExp::Finite(v) => Some(*v),
            RExp::Inf => None,
        }
    }

    /// Conjugate exponent `r' = r / (r - 1)`; `inf` for `r = 1` and 1 for `inf`.
    pub fn conjugate(&self) -> RExp<T> {
        match self {
            RExp::Inf => RExp::Finite(T::one()),
            RExp::Finite(r) => {
                if *r == T::one() {
                    RExp::Inf
                } else {
                    RExp::Finite(*r / (*r - T::one()))
                }
            }
        }
    }
}

impl<T: Scalar> fmt::Display for RExp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RExp::Finite(v) => write!(f, "{v}"),
            RExp::Inf => write!(f, "inf"),
        }
    }
}

/// `L^r` norm of a nodal field. Finite `r` uses trapezoid weights on the
/// component modulus; `r = inf` is the plain nodal maximum.
pub fn lp_norm<T: Scalar>(grid: &Grid<T>, field: &GridField<T>, r: RExp<T>) -> Result<T> {
    if !field.matches(grid) {
        return Err(Error::Grid("field shape does not match grid".into()));
    }
    let nc = grid.components();
    match r {
        RExp::Inf => {
            let mut worst = T::zero();
            for node in 0..grid.num_nodes() {
                worst = worst.max(field.modulus(nc, node));
            }
            Ok(worst)
        }
        RExp::Finite(r) => {
            if r < T::one() || !r.is_finite() {
                return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {r}")));
            }
            let mut acc = T::zero();
            for node in 0..grid.num_nodes() {
                let m = field.modulus(nc, node);
                acc += grid.node_weight(node) * m.powf(r);
            }
            let v = acc.powf(r.recip());
            if !v.is_finite() {
                return Err(Error::NonFinite("lp norm".into()));
            }
            Ok(v)
        }
    }
}

/// Where a sampled quantity lives, for integrals against a variable exponent.
#[derive(Debug, Clone, Copy)]
pub enum FieldView<'a, T: Scalar> {
    /// Nodal values; modulus over components, trapezoid weights, exponent
    /// evaluated at node positions.
    Nodes(&'a GridField<T>),
    /// Cell-valued gradient/flux; Frobenius modulus, midpoint weights,
    /// exponent evaluated at cell centers.
    Cells(&'a CellGradient<T>),
}

fn moduli_weights_positions<T: Scalar>(
    grid: &Grid<T>,
    view: FieldView<'_, T>,
) -> Result<Vec<(T, T, [T; 2])>> {
    match view {
        FieldView::Nodes(f) => {
            if !f.matches(grid) {
                return Err(Error::Grid("field shape does not match grid".into()));
            }
            let nc = grid.components();
            Ok((0..grid.num_nodes())
                .map(|i| (f.modulus(nc, i), grid.node_weight(i), grid.node_position(i)))
                .collect())
        }
        FieldView::Cells(f) => {
            if !f.matches(grid) {
                return Err(Error::Grid("cell data shape does not match grid".into()));
            }
            let vol = grid.cell_volume();
            Ok((0..grid.num_cells())
                .map(|c| (f.modulus_squared(grid, c).sqrt(), vol, grid.cell_center(c)))
                .collect())
        }
    }
}

/// Variable-exponent modular `integral of |f(x)|^{q(t,x)} dx` at time `t`.
pub fn modular<T: Scalar>(
    grid: &Grid<T>,
    view: FieldView<'_, T>,
    q: &ExponentField<T>,
    t: T,
) -> Result<T> {
    let samples = moduli_weights_positions(grid, view)?;
    let mut acc = T::zero();
    for (m, w, pos) in &samples {
        let qv = q.eval(t, &pos[..grid.dim()])?;
        acc += *w * m.powf(qv);
    }
    if !acc.is_finite() {
        return Err(Error::NonFinite("modular".into()));
    }
    Ok(acc)
}

/// Luxemburg norm: the unique `lambda > 0` with `modular(f / lambda) = 1`,
/// found by bracketing and bisection to relative width `rel_tol`. Zero fields
/// return 0. The modular is strictly decreasing in `lambda` wherever positive,
/// so the bracket, grown geometrically from constant-exponent seeds, is safe.
pub fn luxemburg_norm<T: Scalar>(
    grid: &Grid<T>,
    view: FieldView<'_, T>,
    q: &ExponentField<T>,
    t: T,
    rel_tol: T,
) -> Result<T> {
    if !(rel_tol > T::zero()) {
        return Err(Error::InvalidArgument("bisection tolerance must be positive".into()));
    }
    let samples = moduli_weights_positions(grid, view)?;
    let mut qs = Vec::with_capacity(samples.len());
    for (_, _, pos) in &samples {
        qs.push(q.eval(t, &pos[..grid.dim()])?);
    }
    if samples.iter().all(|(m, _, _)| *m == T::zero()) {
        return Ok(T::zero());
    }
    let rho = |lambda: T| -> T {
        let mut acc = T::zero();
        for ((m, w, _), qv) in samples.iter().zip(&qs) {
            acc += *w * (*m / lambda).powf(*qv);
        }
        acc
    };

    // Seed from the constant-exponent norms at the sampled bound exponents;
    // for q identically constant this already lands on the root.
    let seed_norm = |r: T| -> T {
        let mut acc = T::zero();
        for (m, w, _) in &samples {
            acc += *w * m.powf(r);
        }
        acc.powf(r.recip())
    };
    let measure_scale = grid.domain_measure().max(T::one());
    let s_lo = seed_norm(q.p_minus());
    let s_hi = seed_norm(q.p_plus());
    let mut lo = (s_lo.min(s_hi) / measure_scale).max(cast::<T>(1e-300));
    let mut hi = (s_lo.max(s_hi) * measure_scale).max(lo * cast::<T>(2.0));
    // rho(lo) must be >= 1 and rho(hi) <= 1; expand geometrically until so.
    let two = cast::<T>(2.0);
    for _ in 0..2100 {
        if rho(lo) >= T::one() {
            break;
        }
        lo /= two;
    }
    for _ in 0..2100 {
        if rho(hi) <= T::one() {
            break;
        }
        hi *= two;
    }
    if !(rho(lo) >= T::one() && rho(hi) <= T::one()) {
        return Err(Error::NonFinite("luxemburg bracket".into()));
    }
    let mut iters = 0;
    while (hi - lo) > rel_tol * hi.max(T::one().min(hi)) && iters < 500 {
        let mid = (lo + hi) * cast::<T>(0.5);
        if rho(mid) >= T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    let root = (lo + hi) * cast::<T>(0.5);
    if !root.is_finite() {
        return Err(Error::NonFinite("luxemburg norm".into()));
    }
    Ok(root)
}

/// One evaluated norm of one snapshot.
#[derive(Debug, Clone, Copy)]
pub struct NormRecord<T: Scalar> {
    pub t: T,
    pub r: RExp<T>,
    pub value: T,
}

/// Evaluates `L^r` norms of every stored snapshot for every requested
/// exponent. Records are ordered by time, then by exponent with `inf` last.
pub fn norm_trajectory<T: Scalar>(
    grid: &Grid<T>,
    traj: &Trajectory<T>,
    rs: &[RExp<T>],
) -> Result<Vec<NormRecord<T>>> {
    let mut rs = rs.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).expect("norm exponents are comparable"));
    rs.dedup();
    let mut out = Vec::with_capacity(traj.snapshots.len() * rs.len());
    for snap in &traj.snapshots {
        for r in &rs {
            out.push(NormRecord { t: snap.time, r: *r, value: lp_norm(grid, snap, *r)? });
        }
    }
    Ok(out)
}

/// `L^r` distances of every snapshot from a fixed reference field, time-ordered.
pub fn difference_norms<T: Scalar>(
    grid: &Grid<T>,
    traj: &Trajectory<T>,
    reference: &GridField<T>,
    r: RExp<T>,
) -> Result<Vec<(T, T)>> {
    if !reference.matches(grid) {
        return Err(Error::Grid("reference field shape does not match grid".into()));
    }
    let mut out = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let mut diff = snap.clone();
        for (d, r0) in diff.data.iter_mut().zip(&reference.data) {
            *d -= *r0;
        }
        out.push((snap.time, lp_norm(grid, &diff, r)?));
    }
    Ok(out)
}
