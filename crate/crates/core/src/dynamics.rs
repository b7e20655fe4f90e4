//! Time stepping for the regularized variable-exponent diffusion flow.
//!
//! One implicit Euler step from `u_prev` over `tau` is the minimizer of
//!
//! ```text
//! J(w) = ∫ |w - u_prev|^2 / (2 tau)
//!      + (nu/2) ∫ |grad_h w|^2
//!      + ∫ (mu + |grad_h w|^2)^(p/2) / p ,      p = p(t_next, x) at cell centers
//! ```
//!
//! over fields vanishing on the boundary. J is strictly convex, so the step is
//! well defined; its stationarity condition is the discrete weak form of the
//! flow. The exponent is frozen at the end-of-step time. Minimization uses a
//! diagonally preconditioned nonlinear conjugate gradient iteration with a
//! backtracking line search, so every inner iterate decreases J.
//!
//! Because the discrete divergence is the exact negative adjoint of the cell
//! gradient, the minimizer inherits the structural properties of the
//! continuous flow exactly (up to the inner tolerance): the component modulus
//! obeys a maximum principle, and every `L^r` norm with `r in [2, inf]` is
//! nonincreasing from step to step.

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::{
    apply_dirichlet, discrete_divergence, discrete_gradient, dot_nodes, CellGradient, Grid,
    GridField,
};
use crate::scalar::{cast, Scalar};
use thiserror::Error as ThisError;

/// Parameters of one implicit step and of the inner minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams<T: Scalar> {
    /// Flux regularization; keeps the diffusion coefficient finite when p < 2.
    pub mu: T,
    /// Strength of the extra linear viscosity.
    pub nu: T,
    /// Step size.
    pub tau: T,
    /// Relative inner tolerance; the minimization stops once the energy
    /// gradient norm falls below `inner_tol * (1 + |u_prev|_2 / tau)`.
    pub inner_tol: T,
    pub max_inner_iters: usize,
}

impl<T: Scalar> StepParams<T> {
    /// Checks internal consistency against the exponent's lower bound.
    pub fn validate(&self, p_minus: T) -> Result<()> {
        if !(self.tau > T::zero()) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        if self.mu < T::zero() || self.mu >= T::one() {
            return Err(Error::InvalidArgument(format!("mu must lie in [0, 1), got {}", self.mu)));
        }
        if self.nu < T::zero() {
            return Err(Error::InvalidArgument("nu must be nonnegative".into()));
        }
        if !(self.inner_tol > T::zero()) {
            return Err(Error::InvalidArgument("inner_tol must be positive".into()));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidArgument("max_inner_iters must be >= 1".into()));
        }
        if p_minus < cast::<T>(2.0) && self.mu == T::zero() {
            return Err(Error::InvalidArgument(
                "mu must be positive when the exponent dips below 2".into(),
            ));
        }
        Ok(())
    }
}

/// Regularized flux `(mu + |G|^2)^((p-2)/2) G` for one gradient block `G`
/// (`dim * components` entries, Frobenius modulus). The only singular
/// combination is `p < 2`, `mu = 0` at a zero gradient.
pub fn flux<T: Scalar>(mu: T, gradient: &[T], p: T) -> Result<Vec<T>> {
    if mu < T::zero() {
        return Err(Error::InvalidArgument("mu must be nonnegative".into()));
    }
    if !(p > T::one()) {
        return Err(Error::InvalidExponent(format!("flux exponent must exceed 1, got {p}")));
    }
    let s: T = gradient.iter().map(|g| *g * *g).sum();
    if p < cast::<T>(2.0) && mu == T::zero() && s == T::zero() {
        return Err(Error::SingularFlux { p: p.to_f64().unwrap_or(f64::NAN) });
    }
    let a = flux_coefficient(mu, s, p);
    Ok(gradient.iter().map(|g| a * *g).collect())
}

/// `(mu + s)^((p-2)/2)` with `s = |G|^2`; assumes the singular case is excluded.
#[inline]
fn flux_coefficient<T: Scalar>(mu: T, s: T, p: T) -> T {
    let two = cast::<T>(2.0);
    if p == two {
        return T::one();
    }
    (mu + s).powf((p - two) / two)
}

/// Per-cell energy density for the inner minimization, written as a function
/// of `s = |grad w|^2`. `coeff` is `2 d(density)/ds`, the scalar multiplying
/// the gradient in the flux.
pub(crate) enum CellPotential<T: Scalar> {
    /// Forward step: `nu/2 s + (mu + s)^(p/2) / p`.
    Forward { nu: T, mu: T, p: Vec<T> },
    /// Transported-coefficient step: `(nu + b)/2 s + eps s^(q/2) / q`.
    Frozen { nu: T, eps: T, b: Vec<T>, q: Vec<T> },
}

impl<T: Scalar> CellPotential<T> {
    #[inline]
    fn density(&self, cell: usize, s: T) -> T {
        let two = cast::<T>(2.0);
        match self {
            CellPotential::Forward { nu, mu, p } => {
                let pc = p[cell];
                let main = if pc == two {
                    (*mu + s) / two
                } else {
                    (*mu + s).powf(pc / two) / pc
                };
                *nu / two * s + main
            }
            CellPotential::Frozen { nu, eps, b, q } => {
                let qc = q[cell];
                let main = if *eps == T::zero() {
                    T::zero()
                } else if qc == two {
                    *eps * s / two
                } else {
                    *eps * s.powf(qc / two) / qc
                };
                (*nu + b[cell]) / two * s + main
            }
        }
    }

    #[inline]
    fn coeff(&self, cell: usize, s: T) -> T {
        let two = cast::<T>(2.0);
        match self {
            CellPotential::Forward { nu, mu, p } => *nu + flux_coefficient(*mu, s, p[cell]),
            CellPotential::Frozen { nu, eps, b, q } => {
                let qc = q[cell];
                let extra = if *eps == T::zero() {
                    T::zero()
                } else if qc == two {
                    *eps
                } else {
                    *eps * s.powf((qc - two) / two)
                };
                *nu + b[cell] + extra
            }
        }
    }

    /// `d(coeff)/ds`; feeds the radial part of the directional curvature.
    /// Returns zero at `s = 0`, where the radial term vanishes anyway.
    #[inline]
    fn coeff_derivative(&self, cell: usize, s: T) -> T {
        let two = cast::<T>(2.0);
        let four = cast::<T>(4.0);
        match self {
            CellPotential::Forward { mu, p, .. } => {
                let pc = p[cell];
                let base = *mu + s;
                if pc == two || base == T::zero() {
                    T::zero()
                } else {
                    (pc - two) / two * base.powf((pc - four) / two)
                }
            }
            CellPotential::Frozen { eps, q, .. } => {
                let qc = q[cell];
                if *eps == T::zero() || qc == two || s == T::zero() {
                    T::zero()
                } else {
                    *eps * (qc - two) / two * s.powf((qc - four) / two)
                }
            }
        }
    }
}

/// Samples an exponent at every cell center for a fixed time.
pub fn sample_cell_exponents<T: Scalar>(
    grid: &Grid<T>,
    p_field: &ExponentField<T>,
    t: T,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(grid.num_cells());
    for cell in 0..grid.num_cells() {
        let c = grid.cell_center(cell);
        let p = p_field.eval(t, &c[..grid.dim()])?;
        if !(p > T::one()) {
            return Err(Error::InvalidExponent(format!("p = {p} at a cell center")));
        }
        out.push(p);
    }
    Ok(out)
}

/// Objective value of the implicit step at trial state `w`.
pub fn step_energy<T: Scalar>(
    grid: &Grid<T>,
    w: &GridField<T>,
    u_prev: &GridField<T>,
    p_field: &ExponentField<T>,
    params: &StepParams<T>,
    t_next: T,
) -> Result<T> {
    let p_cells = sample_cell_exponents(grid, p_field, t_next)?;
    let potential =
        CellPotential::Forward { nu: params.nu, mu: params.mu, p: p_cells };
    energy_of(grid, w, u_prev, params.tau, &potential)
}

/// Gradient of the step objective under the weighted nodal pairing; boundary
/// rows are zero. At interior nodes this is
/// `(w - u_prev)/tau - nu div grad w - div flux(mu, grad w, p)`.
pub fn step_energy_gradient<T: Scalar>(
    grid: &Grid<T>,
    w: &GridField<T>,
    u_prev: &GridField<T>,
    p_field: &ExponentField<T>,
    params: &StepParams<T>,
    t_next: T,
) -> Result<GridField<T>> {
    let p_cells = sample_cell_exponents(grid, p_field, t_next)?;
    let potential =
        CellPotential::Forward { nu: params.nu, mu: params.mu, p: p_cells };
    Ok(energy_gradient_of(grid, w, u_prev, params.tau, &potential)?.gradient)
}

fn energy_of<T: Scalar>(
    grid: &Grid<T>,
    w: &GridField<T>,
    u_prev: &GridField<T>,
    tau: T,
    potential: &CellPotential<T>,
) -> Result<T> {
    if !w.matches(grid) || !u_prev.matches(grid) {
        return Err(Error::Grid("field shape does not match grid".into()));
    }
    let nc = grid.components();
    let two_tau = cast::<T>(2.0) * tau;
    let mut data_term = T::zero();
    for node in 0..grid.num_nodes() {
        let wgt = grid.node_weight(node);
        let mut d2 = T::zero();
        for k in 0..nc {
            let d = w.data[node * nc + k] - u_prev.data[node * nc + k];
            d2 += d * d;
        }
        data_term += wgt * d2;
    }
    data_term /= two_tau;
    let g = discrete_gradient(grid, w)?;
    let vol = grid.cell_volume();
    let mut grad_term = T::zero();
    for cell in 0..grid.num_cells() {
        let s = g.modulus_squared(grid, cell);
        grad_term += potential.density(cell, s);
    }
    let total = data_term + grad_term * vol;
    if !total.is_finite() {
        return Err(Error::NonFinite("step energy".into()));
    }
    Ok(total)
}

/// One evaluation of the step functional at a trial state.
struct StepEvaluation<T: Scalar> {
    energy: T,
    gradient: GridField<T>,
    /// Per-cell flux coefficients, reused by the preconditioner.
    coefficients: Vec<T>,
    /// Cell gradient of the trial state, reused by the curvature probe.
    w_gradient: CellGradient<T>,
}

fn energy_gradient_of<T: Scalar>(
    grid: &Grid<T>,
    w: &GridField<T>,
    u_prev: &GridField<T>,
    tau: T,
    potential: &CellPotential<T>,
) -> Result<StepEvaluation<T>> {
    if !w.matches(grid) || !u_prev.matches(grid) {
        return Err(Error::Grid("field shape does not match grid".into()));
    }
    let nc = grid.components();
    let dim = grid.dim();
    let g = discrete_gradient(grid, w)?;
    let vol = grid.cell_volume();
    let mut coeffs = Vec::with_capacity(grid.num_cells());
    let mut flux_field = CellGradient::zeros(grid, w.time);
    let mut grad_term = T::zero();
    for cell in 0..grid.num_cells() {
        let s = g.modulus_squared(grid, cell);
        grad_term += potential.density(cell, s);
        let a = potential.coeff(cell, s);
        coeffs.push(a);
        let base = cell * dim * nc;
        for j in 0..dim * nc {
            flux_field.data[base + j] = a * g.data[base + j];
        }
    }
    let div = discrete_divergence(grid, &flux_field)?;
    let mut grad = GridField::zeros(grid, w.time);
    let two_tau = cast::<T>(2.0) * tau;
    let mut data_term = T::zero();
    for node in 0..grid.num_nodes() {
        if grid.is_boundary(node) {
            continue;
        }
        let wgt = grid.node_weight(node);
        let mut d2 = T::zero();
        for k in 0..nc {
            let d = w.data[node * nc + k] - u_prev.data[node * nc + k];
            d2 += d * d;
            grad.data[node * nc + k] = d / tau - div.data[node * nc + k];
        }
        data_term += wgt * d2;
    }
    // Boundary nodes of w and u_prev agree (both zero), so skipping them above
    // loses nothing of the data term.
    let energy = data_term / two_tau + grad_term * vol;
    if !energy.is_finite() {
        return Err(Error::NonFinite("step energy".into()));
    }
    Ok(StepEvaluation { energy, gradient: grad, coefficients: coeffs, w_gradient: g })
}

/// Why a step failed.
#[derive(Debug, Clone, ThisError)]
pub enum SolveError<T: Scalar> {
    #[error("inner solver stopped at gradient norm {grad_norm} after {iterations} iterations")]
    NonConvergence { last: GridField<T>, grad_norm: T, iterations: usize },
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Inner-solver statistics of one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepStats<T: Scalar> {
    pub step: usize,
    pub time: T,
    pub inner_iterations: usize,
    pub grad_norm: T,
    pub energy: T,
}

pub(crate) struct MinimizeOutcome<T: Scalar> {
    pub(crate) state: GridField<T>,
    pub(crate) iterations: usize,
    pub(crate) grad_norm: T,
    pub(crate) energy: T,
}

/// Preconditioned nonlinear CG with Armijo backtracking. Descent is enforced
/// every iteration; directions reset to preconditioned steepest descent
/// whenever conjugacy stops paying off.
pub(crate) fn minimize<T: Scalar>(
    grid: &Grid<T>,
    u_prev: &GridField<T>,
    tau: T,
    potential: &CellPotential<T>,
    threshold: T,
    max_iters: usize,
) -> std::result::Result<MinimizeOutcome<T>, SolveError<T>> {
    let nc = grid.components();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    // Geometry factor: sum over axes of the squared gradient coefficient a
    // single node carries in one cell.
    let mut sfac = T::one() / (grid.spacing(0) * grid.spacing(0));
    if dim == 2 {
        let h1 = grid.spacing(0);
        let h2 = grid.spacing(1);
        let quarter = cast::<T>(0.25);
        sfac = quarter / (h1 * h1) + quarter / (h2 * h2);
    }

    let mut w = u_prev.clone();
    let eval = energy_gradient_of(grid, &w, u_prev, tau, potential)?;
    let (mut energy, mut grad, mut coeffs, mut w_grad) =
        (eval.energy, eval.gradient, eval.coefficients, eval.w_gradient);
    let mut grad_norm = dot_nodes(grid, &grad, &grad)?.sqrt();

    let n_nodes = grid.num_nodes();
    let mut precond = vec![T::zero(); n_nodes];
    let mut z = GridField::zeros(grid, w.time);
    let mut dir = GridField::zeros(grid, w.time);
    let mut grad_prev: Option<(GridField<T>, T)> = None;
    let c1 = cast::<T>(1e-4);
    let half = cast::<T>(0.5);

    let mut iterations = 0usize;
    while grad_norm > threshold {
        if iterations >= max_iters {
            return Err(SolveError::NonConvergence {
                last: w,
                grad_norm,
                iterations,
            });
        }
        // Diagonal of the (Gauss-Newton) Hessian under the weighted pairing.
        for m in precond.iter_mut() {
            *m = T::one() / tau;
        }
        for cell in 0..grid.num_cells() {
            let add = vol * coeffs[cell] * sfac;
            let (c1i, c2i) = grid.cell_multi(cell);
            let corners: [usize; 4] = if dim == 1 {
                [cell, cell + 1, usize::MAX, usize::MAX]
            } else {
                [
                    grid.node_index(c1i, c2i),
                    grid.node_index(c1i + 1, c2i),
                    grid.node_index(c1i, c2i + 1),
                    grid.node_index(c1i + 1, c2i + 1),
                ]
            };
            for &node in corners.iter().take(if dim == 1 { 2 } else { 4 }) {
                precond[node] += add / grid.node_weight(node);
            }
        }
        for node in 0..n_nodes {
            let inv = T::one() / precond[node];
            for k in 0..nc {
                z.data[node * nc + k] = grad.data[node * nc + k] * inv;
            }
        }
        let gz = dot_nodes(grid, &grad, &z)?;
        let beta = match &grad_prev {
            Some((g_old, gz_old)) if *gz_old > T::zero() => {
                let mixed = dot_nodes(grid, g_old, &z)?;
                ((gz - mixed) / *gz_old).max(T::zero())
            }
            _ => T::zero(),
        };
        let mut restarted = beta == T::zero();
        for j in 0..dir.data.len() {
            dir.data[j] = -z.data[j] + beta * dir.data[j];
        }
        let mut slope = dot_nodes(grid, &grad, &dir)?;
        if slope >= T::zero() {
            // Conjugate direction lost descent; fall back to steepest.
            for j in 0..dir.data.len() {
                dir.data[j] = -z.data[j];
            }
            slope = -gz;
            restarted = true;
        }

        // Exact directional curvature at the current point. The trial step
        // -slope/curvature is the exact line minimizer whenever the potential
        // is quadratic, which keeps conjugacy intact; Armijo backtracking
        // only has to clean up genuinely nonquadratic cells.
        let dir_grad = discrete_gradient(grid, &dir)?;
        let mut curv_cells = T::zero();
        let block = grid.dim() * grid.components();
        for cell in 0..grid.num_cells() {
            let s = w_grad.modulus_squared(grid, cell);
            let gd2 = dir_grad.modulus_squared(grid, cell);
            let base = cell * block;
            let mut mixed = T::zero();
            for j in 0..block {
                mixed += w_grad.data[base + j] * dir_grad.data[base + j];
            }
            let dc = potential.coeff_derivative(cell, s);
            curv_cells = curv_cells + coeffs[cell] * gd2 + cast::<T>(2.0) * dc * mixed * mixed;
        }
        let curvature = dot_nodes(grid, &dir, &dir)? / tau + curv_cells * vol;
        let mut alpha = if curvature > T::zero() && (-slope / curvature).is_finite() {
            -slope / curvature
        } else {
            T::one()
        };
        if !(alpha > T::zero()) {
            alpha = T::one();
        }
        let mut accepted = false;
        // Near the minimizer the sufficient-decrease margin drops below one
        // ulp of the energy; the slack keeps the search from rejecting steps
        // whose true decrease is smaller than roundoff. Gradients keep full
        // relative precision, so iterating through the floor still converges.
        let floor = cast::<T>(4.0) * T::epsilon() * (T::one() + energy.abs());
        for _ in 0..80 {
            let mut trial = w.clone();
            for j in 0..trial.data.len() {
                trial.data[j] += alpha * dir.data[j];
            }
            let trial_energy = energy_of(grid, &trial, u_prev, tau, potential)?;
            if trial_energy <= energy + c1 * alpha * slope + floor {
                w = trial;
                energy = trial_energy;
                accepted = true;
                break;
            }
            alpha *= half;
        }
        if !accepted {
            if restarted {
                // Even steepest descent cannot move: numerically stationary.
                return Err(SolveError::NonConvergence { last: w, grad_norm, iterations });
            }
            // Retry from steepest descent on the next sweep.
            grad_prev = None;
            iterations += 1;
            continue;
        }
        grad_prev = Some((std::mem::replace(&mut grad, GridField::zeros(grid, w.time)), gz));
        let eval = energy_gradient_of(grid, &w, u_prev, tau, potential)?;
        energy = eval.energy;
        grad = eval.gradient;
        coeffs = eval.coefficients;
        w_grad = eval.w_gradient;
        grad_norm = dot_nodes(grid, &grad, &grad)?.sqrt();
        iterations += 1;
    }
    Ok(MinimizeOutcome { state: w, iterations, grad_norm, energy })
}

/// One implicit Euler step: minimizes the step objective starting from
/// `u_prev`. The returned field carries time `t_next`.
pub fn implicit_step<T: Scalar>(
    grid: &Grid<T>,
    u_prev: &GridField<T>,
    p_field: &ExponentField<T>,
    params: &StepParams<T>,
    t_next: T,
) -> std::result::Result<(GridField<T>, StepStats<T>), SolveError<T>> {
    params.validate(p_field.p_minus())?;
    let p_cells = sample_cell_exponents(grid, p_field, t_next)?;
    let potential = CellPotential::Forward { nu: params.nu, mu: params.mu, p: p_cells };
    let prev_norm = dot_nodes(grid, u_prev, u_prev)?.sqrt();
    let threshold = params.inner_tol * (T::one() + prev_norm / params.tau);
    let out = minimize(grid, u_prev, params.tau, &potential, threshold, params.max_inner_iters)?;
    let mut state = out.state;
    state.time = t_next;
    let stats = StepStats {
        step: 0,
        time: t_next,
        inner_iterations: out.iterations,
        grad_norm: out.grad_norm,
        energy: out.energy,
    };
    Ok((state, stats))
}

/// A computed evolution: stored snapshots (each tagged with its time), the
/// per-step inner-solver statistics, and the stepping parameters.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub params: StepParams<T>,
    pub snapshots: Vec<GridField<T>>,
    pub stats: Vec<StepStats<T>>,
    /// Every step stored: snapshot `k` is the state after `k` steps.
    pub dense: bool,
    pub num_steps: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn initial(&self) -> &GridField<T> {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &GridField<T> {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }

    /// State after `k` steps; only available on dense trajectories.
    pub fn state_at_step(&self, k: usize) -> Result<&GridField<T>> {
        if !self.dense {
            return Err(Error::DenseRequired("per-step access".into()));
        }
        self.snapshots
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("step {k} beyond {}", self.num_steps)))
    }
}

/// A failed run together with everything computed before the failure.
#[derive(Debug)]
pub struct SolveFailure<T: Scalar> {
    pub partial: Trajectory<T>,
    pub error: SolveError<T>,
}

/// Runs `round(horizon / tau)` implicit steps from `u0`. Snapshots are stored
/// at the requested times rounded to step boundaries (the initial and final
/// states always), or at every step when `dense` is set. Inner-solver
/// statistics are recorded for every step regardless.
pub fn solve_trajectory<T: Scalar>(
    grid: &Grid<T>,
    u0: &GridField<T>,
    p_field: &ExponentField<T>,
    params: &StepParams<T>,
    horizon: T,
    snapshot_times: &[T],
    dense: bool,
) -> std::result::Result<Trajectory<T>, Box<SolveFailure<T>>> {
    let prepare = || -> Result<(GridField<T>, usize, Vec<usize>)> {
        params.validate(p_field.p_minus())?;
        if !(horizon > T::zero()) {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        let steps_f = (horizon / params.tau).round();
        let num_steps = steps_f.to_f64().unwrap_or(0.0) as usize;
        if num_steps == 0 {
            return Err(Error::InvalidArgument("horizon shorter than one step".into()));
        }
        let mut marks: Vec<usize> = vec![0, num_steps];
        for t in snapshot_times {
            if *t < T::zero() {
                return Err(Error::InvalidArgument("snapshot times must be nonnegative".into()));
            }
            let k = (*t / params.tau).round().to_f64().unwrap_or(0.0) as usize;
            marks.push(k.min(num_steps));
        }
        marks.sort_unstable();
        marks.dedup();
        let mut u0 = apply_dirichlet(grid, u0)?;
        u0.time = T::zero();
        Ok((u0, num_steps, marks))
    };
    let (u0, num_steps, marks) = match prepare() {
        Ok(v) => v,
        Err(e) => {
            return Err(Box::new(SolveFailure {
                partial: Trajectory {
                    params: *params,
                    snapshots: Vec::new(),
                    stats: Vec::new(),
                    dense,
                    num_steps: 0,
                },
                error: SolveError::Invalid(e),
            }))
        }
    };

    let mut snapshots = Vec::new();
    let mut stats = Vec::with_capacity(num_steps);
    snapshots.push(u0.clone());
    let mut current = u0;
    let mut mark_iter = marks.iter().skip(1).peekable();
    for k in 1..=num_steps {
        let t_next = params.tau * cast::<T>(k as f64);
        match implicit_step(grid, &current, p_field, params, t_next) {
            Ok((next, mut st)) => {
                st.step = k;
                stats.push(st);
                current = next;
                let store = dense || mark_iter.peek().is_some_and(|m| **m == k);
                if !dense {
                    while mark_iter.peek().is_some_and(|m| **m <= k) {
                        mark_iter.next();
                    }
                }
                if store {
                    snapshots.push(current.clone());
                }
            }
            Err(error) => {
                return Err(Box::new(SolveFailure {
                    partial: Trajectory {
                        params: *params,
                        snapshots,
                        stats,
                        dense,
                        num_steps: k - 1,
                    },
                    error,
                }));
            }
        }
    }
    Ok(Trajectory { params: *params, snapshots, stats, dense, num_steps })
}

/// Vanishing-regularization study: one solve per `(mu, nu)` rung and the `L^2`
/// distances between consecutive rungs at shared snapshot times.
#[derive(Debug, Clone)]
pub struct LadderReport<T: Scalar> {
    pub rungs: Vec<(T, T)>,
    pub times: Vec<T>,
    /// `diffs[j][i]` is the distance between rungs `j` and `j+1` at `times[i]`.
    pub diffs: Vec<Vec<T>>,
}

pub struct LadderOutcome<T: Scalar> {
    pub report: LadderReport<T>,
    pub trajectories: Vec<Trajectory<T>>,
}

pub fn continuation_ladder<T: Scalar>(
    grid: &Grid<T>,
    u0: &GridField<T>,
    p_field: &ExponentField<T>,
    base: &StepParams<T>,
    rungs: &[(T, T)],
    horizon: T,
    snapshot_times: &[T],
) -> std::result::Result<LadderOutcome<T>, Box<SolveFailure<T>>> {
    let validate = || -> Result<()> {
        if rungs.len() < 2 {
            return Err(Error::InvalidArgument("ladder needs at least two rungs".into()));
        }
        for w in rungs.windows(2) {
            let (m0, n0) = w[0];
            let (m1, n1) = w[1];
            if m1 > m0 || n1 > n0 || (m1 == m0 && n1 == n0) {
                return Err(Error::InvalidArgument(
                    "ladder rungs must decrease in (mu, nu)".into(),
                ));
            }
        }
        Ok(())
    };
    if let Err(e) = validate() {
        return Err(Box::new(SolveFailure {
            partial: Trajectory {
                params: *base,
                snapshots: Vec::new(),
                stats: Vec::new(),
                dense: false,
                num_steps: 0,
            },
            error: SolveError::Invalid(e),
        }));
    }
    let mut trajectories = Vec::with_capacity(rungs.len());
    for (mu, nu) in rungs {
        let params = StepParams { mu: *mu, nu: *nu, ..*base };
        let traj = solve_trajectory(grid, u0, p_field, &params, horizon, snapshot_times, false)?;
        trajectories.push(traj);
    }
    let times: Vec<T> = trajectories[0].snapshots.iter().map(|s| s.time).collect();
    let mut diffs = Vec::with_capacity(rungs.len() - 1);
    for pair in trajectories.windows(2) {
        let mut row = Vec::with_capacity(times.len());
        for (a, b) in pair[0].snapshots.iter().zip(&pair[1].snapshots) {
            let mut d = a.clone();
            for (x, y) in d.data.iter_mut().zip(&b.data) {
                *x -= *y;
            }
            row.push(dot_nodes(grid, &d, &d).map_err(|e| {
                Box::new(SolveFailure {
                    partial: pair[0].clone(),
                    error: SolveError::Invalid(e),
                })
            })?.sqrt());
        }
        diffs.push(row);
    }
    Ok(LadderOutcome { report: LadderReport { rungs: rungs.to_vec(), times, diffs }, trajectories })
}
