//! Backward-in-time companion flow and the duality checks built on it.
//!
//! Each forward implicit step satisfies, in hindsight, the linear equation
//! `(I + tau L_m) v^m = v^(m-1)` where `L_m w = -div((nu + b_m) grad w)` and
//! the per-cell coefficient `b_m = (mu + |grad v^m|^2)^((p-2)/2)` is read off
//! the converged state itself. Freezing those coefficients and stepping the
//! same operators in reverse order produces a companion field `phi` whose
//! weighted pairing with the forward states telescopes exactly: with the
//! optional extra diffusion switched off, `(v^M, phi^0) = (v^0, phi^M)` up to
//! inner-solver tolerance, for any exponent layout.
//!
//! With the extra diffusion term `eps |grad phi|^(qbar-2) grad phi` switched
//! on, the telescoping picks up one defect term per step. The reciprocity
//! residual reported here subtracts an explicitly computable defect that
//! pairs each forward gradient with the companion iterate at the start of
//! the matching slab, so the residual shrinks proportionally to `eps` times
//! the step size rather than merely staying bounded.
//!
//! Backward snapshots are tagged with the backward clock: snapshot `k` holds
//! time `k * tau`, i.e. elapsed time since the terminal datum.

use crate::dynamics::{
    sample_cell_exponents, CellPotential, SolveError, StepStats, Trajectory,
};
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::mesh::{
    apply_dirichlet, discrete_gradient, dot_cells, dot_nodes, CellGradient, Grid, GridField,
};
use crate::norms::{lp_norm, RExp};
use crate::scalar::{cast, Scalar};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

/// Per-cell data of one backward slab: the frozen diffusion coefficient and
/// the exponent of the extra diffusion term.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabCoefficients<T: Scalar> {
    /// `(mu + |grad v^m|^2)^((p(t_m)-2)/2)` per cell. The forward viscosity
    /// is not baked in; the backward step adds its own `nu` on top.
    pub b: Vec<T>,
    /// `max(2, p(t_m, x))` per cell.
    pub qbar: Vec<T>,
}

/// Frozen diffusion coefficients of a completed forward run, one slab per
/// forward step. Rebuilding from the same trajectory is bitwise reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenCoefficients<T: Scalar> {
    pub tau: T,
    slabs: Vec<SlabCoefficients<T>>,
}

impl<T: Scalar> FrozenCoefficients<T> {
    /// Reads coefficients off every post-step state of a dense trajectory.
    pub fn from_trajectory(
        grid: &Grid<T>,
        forward: &Trajectory<T>,
        p_field: &ExponentField<T>,
    ) -> Result<Self> {
        if !forward.dense {
            return Err(Error::DenseRequired("frozen coefficients".into()));
        }
        let two = cast::<T>(2.0);
        let mu = forward.params.mu;
        let mut slabs = Vec::with_capacity(forward.num_steps);
        for m in 1..=forward.num_steps {
            let state = forward.state_at_step(m)?;
            let p_cells = sample_cell_exponents(grid, p_field, state.time)?;
            let g = discrete_gradient(grid, state)?;
            let mut b = Vec::with_capacity(grid.num_cells());
            let mut qbar = Vec::with_capacity(grid.num_cells());
            for cell in 0..grid.num_cells() {
                let s = g.modulus_squared(grid, cell);
                let p = p_cells[cell];
                if p < two && mu == T::zero() && s == T::zero() {
                    return Err(Error::SingularFlux { p: p.to_f64().unwrap_or(f64::NAN) });
                }
                let a = if p == two { T::one() } else { (mu + s).powf((p - two) / two) };
                b.push(a);
                qbar.push(p.max(two));
            }
            slabs.push(SlabCoefficients { b, qbar });
        }
        Ok(FrozenCoefficients { tau: forward.params.tau, slabs })
    }

    pub fn num_steps(&self) -> usize {
        self.slabs.len()
    }

    /// Coefficients driving backward step `k` (1-based): the slab of forward
    /// step `M - k + 1`, so the backward pass replays the forward operators in
    /// reverse order.
    pub fn backward_slab(&self, k: usize) -> Result<&SlabCoefficients<T>> {
        if k == 0 || k > self.slabs.len() {
            return Err(Error::InvalidArgument(format!(
                "backward step {k} outside 1..={}",
                self.slabs.len()
            )));
        }
        Ok(&self.slabs[self.slabs.len() - k])
    }
}

/// Parameters of the backward flow. `nu` must repeat the forward viscosity
/// for the pairing identity to telescope exactly; it is a free knob here so
/// the mismatch case remains expressible in tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointParams<T: Scalar> {
    /// Strength of the extra diffusion term; zero recovers the purely frozen
    /// linear flow.
    pub epsilon: T,
    pub nu: T,
    pub tau: T,
    pub inner_tol: T,
    pub max_inner_iters: usize,
}

impl<T: Scalar> AdjointParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon < T::zero() {
            return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
        }
        if self.nu < T::zero() {
            return Err(Error::InvalidArgument("nu must be nonnegative".into()));
        }
        if !(self.tau > T::zero()) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        if !(self.inner_tol > T::zero()) {
            return Err(Error::InvalidArgument("inner_tol must be positive".into()));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidArgument("max_inner_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// One backward implicit step using the frozen slab of backward index `k`.
pub fn adjoint_step<T: Scalar>(
    grid: &Grid<T>,
    phi_prev: &GridField<T>,
    frozen: &FrozenCoefficients<T>,
    k: usize,
    params: &AdjointParams<T>,
) -> std::result::Result<(GridField<T>, StepStats<T>), SolveError<T>> {
    params.validate()?;
    if params.tau != frozen.tau {
        return Err(SolveError::Invalid(Error::InvalidArgument(
            "backward step size must match the frozen trajectory".into(),
        )));
    }
    let slab = frozen.backward_slab(k)?;
    let potential = CellPotential::Frozen {
        nu: params.nu,
        eps: params.epsilon,
        b: slab.b.clone(),
        q: slab.qbar.clone(),
    };
    let prev_norm = dot_nodes(grid, phi_prev, phi_prev)?.sqrt();
    let threshold = params.inner_tol * (T::one() + prev_norm / params.tau);
    let out = crate::dynamics::minimize(
        grid,
        phi_prev,
        params.tau,
        &potential,
        threshold,
        params.max_inner_iters,
    )?;
    let mut state = out.state;
    state.time = phi_prev.time + params.tau;
    let stats = StepStats {
        step: k,
        time: state.time,
        inner_iterations: out.iterations,
        grad_norm: out.grad_norm,
        energy: out.energy,
    };
    Ok((state, stats))
}

/// Backward evolution from a terminal datum; every iterate is stored.
#[derive(Debug, Clone)]
pub struct AdjointTrajectory<T: Scalar> {
    pub params: AdjointParams<T>,
    /// `snapshots[k]` is the state after `k` backward steps; time is the
    /// backward clock `k * tau`.
    pub snapshots: Vec<GridField<T>>,
    pub stats: Vec<StepStats<T>>,
}

impl<T: Scalar> AdjointTrajectory<T> {
    pub fn terminal(&self) -> &GridField<T> {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &GridField<T> {
        self.snapshots.last().expect("backward trajectory holds the terminal datum")
    }
}

/// Runs the backward flow across all frozen slabs.
pub fn solve_adjoint<T: Scalar>(
    grid: &Grid<T>,
    terminal: &GridField<T>,
    frozen: &FrozenCoefficients<T>,
    params: &AdjointParams<T>,
) -> std::result::Result<AdjointTrajectory<T>, SolveError<T>> {
    params.validate()?;
    let mut phi = apply_dirichlet(grid, terminal)?;
    phi.time = T::zero();
    let mut snapshots = Vec::with_capacity(frozen.num_steps() + 1);
    let mut stats = Vec::with_capacity(frozen.num_steps());
    snapshots.push(phi.clone());
    for k in 1..=frozen.num_steps() {
        let (next, st) = adjoint_step(grid, &phi, frozen, k, params)?;
        stats.push(st);
        phi = next;
        snapshots.push(phi.clone());
    }
    Ok(AdjointTrajectory { params: *params, snapshots, stats })
}

/// Outcome of the pairing identity check for one backward run.
#[derive(Debug, Clone)]
pub struct ReciprocityReport<T: Scalar> {
    pub epsilon: T,
    /// `(v^M, phi^0)` under the weighted nodal pairing.
    pub term_pairing: T,
    /// `(v^0, phi^M)`.
    pub term_initial: T,
    /// Sum of the per-step defect contributions.
    pub term_defect: T,
    /// `term_pairing - term_initial - term_defect`.
    pub residual: T,
    /// Per-step defect contributions, forward step order; entry `m-1` pairs
    /// `grad v^m` with the backward iterate entering the matching slab.
    pub contributions: Vec<T>,
}

/// Evaluates the pairing identity between a dense forward run and a backward
/// run on its frozen coefficients.
pub fn reciprocity_residual<T: Scalar>(
    grid: &Grid<T>,
    forward: &Trajectory<T>,
    p_field: &ExponentField<T>,
    backward: &AdjointTrajectory<T>,
) -> Result<ReciprocityReport<T>> {
    if !forward.dense {
        return Err(Error::DenseRequired("reciprocity residual".into()));
    }
    let steps = forward.num_steps;
    if backward.snapshots.len() != steps + 1 {
        return Err(Error::InvalidArgument(format!(
            "backward run has {} states, forward run has {}",
            backward.snapshots.len(),
            steps + 1
        )));
    }
    if backward.params.tau != forward.params.tau {
        return Err(Error::InvalidArgument("step sizes differ between the two runs".into()));
    }
    let eps = backward.params.epsilon;
    let tau = forward.params.tau;
    let two = cast::<T>(2.0);

    let term_pairing = dot_nodes(grid, forward.final_state(), backward.terminal())?;
    let term_initial = dot_nodes(grid, forward.initial(), backward.final_state())?;

    let mut contributions = Vec::with_capacity(steps);
    let mut term_defect = T::zero();
    for m in 1..=steps {
        if eps == T::zero() {
            contributions.push(T::zero());
            continue;
        }
        let v_m = forward.state_at_step(m)?;
        // Backward iterate entering the slab that replays forward step m.
        let phi = &backward.snapshots[steps - m];
        let qbar = sample_cell_exponents(grid, p_field, v_m.time)?
            .iter()
            .map(|p| p.max(two))
            .collect::<Vec<_>>();
        let g_phi = discrete_gradient(grid, phi)?;
        let g_v = discrete_gradient(grid, v_m)?;
        let mut extra_flux = CellGradient::zeros(grid, phi.time);
        let dim = grid.dim();
        let nc = grid.components();
        for cell in 0..grid.num_cells() {
            let s = g_phi.modulus_squared(grid, cell);
            let q = qbar[cell];
            let a = if q == two { T::one() } else { s.powf((q - two) / two) };
            let base = cell * dim * nc;
            for j in 0..dim * nc {
                extra_flux.data[base + j] = a * g_phi.data[base + j];
            }
        }
        let c = eps * tau * dot_cells(grid, &extra_flux, &g_v)?;
        term_defect += c;
        contributions.push(c);
    }
    let residual = term_pairing - term_initial - term_defect;
    if !residual.is_finite() {
        return Err(Error::NonFinite("reciprocity residual".into()));
    }
    Ok(ReciprocityReport {
        epsilon: eps,
        term_pairing,
        term_initial,
        term_defect,
        residual,
        contributions,
    })
}

/// One randomized terminal datum in the duality certificate.
#[derive(Debug, Clone, Copy)]
pub struct DualityProbe<T: Scalar> {
    /// `(v^M, g)` for the unit-norm probe `g`.
    pub pairing: T,
    /// Defect sum of the backward run launched from `g`.
    pub defect: T,
    /// Certified ceiling: initial norm plus defect plus pinned slack.
    pub bound: T,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct DualityReport<T: Scalar> {
    pub r0: RExp<T>,
    pub conjugate: RExp<T>,
    /// Norm of the forward initial state in the tested exponent.
    pub initial_norm: T,
    /// Norm of the forward final state, for reference.
    pub final_norm: T,
    pub probes: Vec<DualityProbe<T>>,
    pub pass: bool,
}

/// Certifies `|v(T)|_(r0) <= |v(0)|_(r0)` by duality: pairs the final state
/// with random terminal data of unit conjugate norm and bounds each pairing
/// through the backward flow. Slack is pinned at `1e-6` relative.
pub fn duality_norm_bound<T: Scalar>(
    grid: &Grid<T>,
    forward: &Trajectory<T>,
    p_field: &ExponentField<T>,
    params: &AdjointParams<T>,
    r0: RExp<T>,
    num_probes: usize,
    seed: u64,
) -> Result<DualityReport<T>> {
    if num_probes == 0 {
        return Err(Error::InvalidArgument("at least one probe is required".into()));
    }
    let conjugate = r0.conjugate();
    let frozen = FrozenCoefficients::from_trajectory(grid, forward, p_field)?;
    let initial_norm = lp_norm(grid, forward.initial(), r0)?;
    let final_norm = lp_norm(grid, forward.final_state(), r0)?;
    let slack = cast::<T>(1e-6) * (T::one() + initial_norm);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = grid.components();
    let mut probes = Vec::with_capacity(num_probes);
    let mut pass = true;
    for _ in 0..num_probes {
        let mut g = GridField::zeros(grid, T::zero());
        for node in 0..grid.num_nodes() {
            if grid.is_boundary(node) {
                continue;
            }
            for comp in 0..nc {
                g.data[node * nc + comp] = cast::<T>(rng.gen_range(-1.0..1.0f64));
            }
        }
        let norm = lp_norm(grid, &g, conjugate)?;
        if norm == T::zero() {
            return Err(Error::InvalidArgument("degenerate probe drawn".into()));
        }
        for v in g.data.iter_mut() {
            *v /= norm;
        }
        let backward = solve_adjoint(grid, &g, &frozen, params).map_err(|e| match e {
            SolveError::Invalid(err) => err,
            SolveError::NonConvergence { grad_norm, iterations, .. } => Error::NonFinite(format!(
                "backward probe stalled at gradient norm {grad_norm} after {iterations} iterations"
            )),
        })?;
        let report = reciprocity_residual(grid, forward, p_field, &backward)?;
        let pairing = report.term_pairing;
        let defect = report.term_defect;
        let bound = initial_norm + defect.abs() + slack;
        let ok = pairing.abs() <= bound;
        pass = pass && ok;
        probes.push(DualityProbe { pairing, defect, bound, ok });
    }
    Ok(DualityReport { r0, conjugate, initial_norm, final_norm, probes, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{solve_trajectory, StepParams};
    use crate::exponent::{ExponentSpec, SpaceTimeBox};
    use rand::Rng;

    fn setup_1d(
        m: usize,
        steps: usize,
        tau: f64,
        mu: f64,
        nu: f64,
    ) -> (Grid<f64>, ExponentField<f64>, Trajectory<f64>, StepParams<f64>) {
        let grid = Grid::new(&[[0.0, 1.0]], &[m], 1).unwrap();
        let horizon = steps as f64 * tau;
        let p_field = ExponentField::new(
            ExponentSpec::Sinusoid {
                base: 2.3,
                amplitude: 0.5,
                freq_t: 2.0,
                freq_x: [1.0, 0.0],
                phase: 0.3,
            },
            SpaceTimeBox::new([0.0, horizon], &[[0.0, 1.0]]).unwrap(),
            64,
        )
        .unwrap();
        let mut u0 = GridField::zeros(&grid, 0.0);
        for node in 0..grid.num_nodes() {
            let x = grid.node_position(node)[0];
            u0.data[node] = (std::f64::consts::PI * x).sin() + 0.3 * (3.0 * std::f64::consts::PI * x).sin();
        }
        let params = StepParams { mu, nu, tau, inner_tol: 1e-13, max_inner_iters: 2000 };
        let traj = solve_trajectory(&grid, &u0, &p_field, &params, horizon, &[], true)
            .map_err(|f| format!("{}", f.error))
            .unwrap();
        (grid, p_field, traj, params)
    }

    fn adjoint_params(eps: f64, nu: f64, tau: f64) -> AdjointParams<f64> {
        AdjointParams { epsilon: eps, nu, tau, inner_tol: 1e-13, max_inner_iters: 2000 }
    }

    #[test]
    fn frozen_slab_replays_forward_step() {
        let (grid, p_field, traj, params) = setup_1d(48, 3, 1e-3, 0.1, 1e-3);
        let frozen = FrozenCoefficients::from_trajectory(&grid, &traj, &p_field).unwrap();
        // Backward step M reuses forward step 1: feeding it v^0 must return v^1,
        // because the frozen coefficients make that step linear in hindsight.
        let ap = adjoint_params(0.0, params.nu, params.tau);
        let (w, _) = adjoint_step(&grid, traj.initial(), &frozen, frozen.num_steps(), &ap).unwrap();
        let v1 = traj.state_at_step(1).unwrap();
        let worst = w
            .data
            .iter()
            .zip(&v1.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-9, "frozen replay deviates by {worst}");
    }

    #[test]
    fn pairing_telescopes_exactly_without_extra_diffusion() {
        let (grid, p_field, traj, params) = setup_1d(64, 25, 1e-3, 0.1, 1e-3);
        let frozen = FrozenCoefficients::from_trajectory(&grid, &traj, &p_field).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut terminal = GridField::zeros(&grid, 0.0);
        for node in 0..grid.num_nodes() {
            terminal.data[node] = rng.gen_range(-1.0..1.0);
        }
        let ap = adjoint_params(0.0, params.nu, params.tau);
        let backward = solve_adjoint(&grid, &terminal, &frozen, &ap).unwrap();
        let report = reciprocity_residual(&grid, &traj, &p_field, &backward).unwrap();
        assert_eq!(report.term_defect, 0.0);
        let scale = 1.0f64.max(report.term_pairing.abs()).max(report.term_initial.abs());
        assert!(
            report.residual.abs() <= 1e-8 * scale,
            "residual {} at scale {scale}",
            report.residual
        );
    }

    #[test]
    fn residual_shrinks_with_epsilon_and_respects_defect_bound() {
        let (grid, p_field, traj, params) = setup_1d(48, 20, 1e-3, 0.1, 1e-3);
        let frozen = FrozenCoefficients::from_trajectory(&grid, &traj, &p_field).unwrap();
        let terminal = traj.final_state().clone();
        let mut magnitudes = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let ap = adjoint_params(eps, params.nu, params.tau);
            let backward = solve_adjoint(&grid, &terminal, &frozen, &ap).unwrap();
            let report = reciprocity_residual(&grid, &traj, &p_field, &backward).unwrap();
            let contribution_budget: f64 = report.contributions.iter().map(|c| c.abs()).sum();
            assert!(
                report.residual.abs() <= contribution_budget + 1e-10,
                "residual {} exceeds defect budget {contribution_budget}",
                report.residual
            );
            magnitudes.push(report.residual.abs());
        }
        assert!(
            magnitudes[0] > magnitudes[1] && magnitudes[1] > magnitudes[2],
            "residuals not strictly decreasing: {magnitudes:?}"
        );
    }

    #[test]
    fn backward_flow_contracts_l2_and_linf() {
        let (grid, p_field, traj, params) = setup_1d(48, 15, 1e-3, 0.1, 1e-3);
        let frozen = FrozenCoefficients::from_trajectory(&grid, &traj, &p_field).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut terminal = GridField::zeros(&grid, 0.0);
        for node in 0..grid.num_nodes() {
            terminal.data[node] = rng.gen_range(-2.0..2.0);
        }
        let ap = adjoint_params(1e-3, params.nu, params.tau);
        let backward = solve_adjoint(&grid, &terminal, &frozen, &ap).unwrap();
        for pair in backward.snapshots.windows(2) {
            let l2_a = lp_norm(&grid, &pair[0], RExp::Finite(2.0)).unwrap();
            let l2_b = lp_norm(&grid, &pair[1], RExp::Finite(2.0)).unwrap();
            let li_a = lp_norm(&grid, &pair[0], RExp::Inf).unwrap();
            let li_b = lp_norm(&grid, &pair[1], RExp::Inf).unwrap();
            assert!(l2_b <= l2_a * (1.0 + 1e-10), "backward L2 grew: {l2_a} -> {l2_b}");
            assert!(li_b <= li_a + 1e-8, "backward Linf grew: {li_a} -> {li_b}");
        }
    }

    #[test]
    fn duality_certificate_passes_on_smooth_run() {
        let (grid, p_field, traj, params) = setup_1d(40, 12, 1e-3, 0.1, 1e-3);
        let ap = adjoint_params(1e-4, params.nu, params.tau);
        let report =
            duality_norm_bound(&grid, &traj, &p_field, &ap, RExp::Finite(2.0), 8, 2024).unwrap();
        assert!(report.pass, "some probe exceeded its bound: {:?}", report.probes);
        assert!(report.final_norm <= report.initial_norm * (1.0 + 1e-10));
        assert_eq!(report.probes.len(), 8);
    }

    #[test]
    fn mismatched_runs_are_rejected() {
        let (grid, p_field, traj, params) = setup_1d(24, 4, 1e-3, 0.1, 1e-3);
        let frozen = FrozenCoefficients::from_trajectory(&grid, &traj, &p_field).unwrap();
        // Wrong step size.
        let bad = adjoint_params(0.0, params.nu, 2e-3);
        assert!(solve_adjoint(&grid, traj.final_state(), &frozen, &bad).is_err());
        // Sparse forward run cannot freeze.
        let sparse = solve_trajectory(&grid, traj.initial(), &p_field, &params, 4e-3, &[], false)
            .map_err(|f| format!("{}", f.error))
            .unwrap();
        assert!(matches!(
            FrozenCoefficients::from_trajectory(&grid, &sparse, &p_field),
            Err(Error::DenseRequired(_))
        ));
        // Backward run of the wrong length.
        let ap = adjoint_params(0.0, params.nu, params.tau);
        let backward = solve_adjoint(&grid, traj.final_state(), &frozen, &ap).unwrap();
        let mut truncated = backward.clone();
        truncated.snapshots.pop();
        assert!(reciprocity_residual(&grid, &traj, &p_field, &truncated).is_err());
    }
}
