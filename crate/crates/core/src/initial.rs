//! Ready-made initial states: a smooth product mode, a normalized tent spike,
//! and seeded interior noise. All constructors return fields that vanish on
//! the boundary; vector-valued grids get the same profile in every component.

use crate::error::{Error, Result};
use crate::mesh::{apply_dirichlet, Grid, GridField, MAX_DIM};
use crate::norms::{lp_norm, RExp};
use crate::scalar::{cast, Scalar};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

/// Product of half-period sine waves along each axis, amplitude one.
pub fn sine_datum<T: Scalar>(grid: &Grid<T>) -> GridField<T> {
    let nc = grid.components();
    let mut f = GridField::zeros(grid, T::zero());
    for node in 0..grid.num_nodes() {
        let pos = grid.node_position(node);
        let mut v = T::one();
        for axis in 0..grid.dim() {
            let [a, b] = grid.extent(axis);
            let arg = T::PI() * (pos[axis] - a) / (b - a);
            v *= arg.sin();
        }
        for comp in 0..nc {
            f.data[node * nc + comp] = v;
        }
    }
    apply_dirichlet(grid, &f).expect("freshly built field matches its grid")
}

/// Tent profile `max(0, 1 - |x - center| / width)`, rescaled so its discrete
/// norm of exponent `r0` is exactly one. The default center is the box
/// midpoint and the default width four times the coarsest spacing, so the
/// spike stays resolved on any admissible grid.
pub fn spike_datum<T: Scalar>(
    grid: &Grid<T>,
    center: Option<[T; MAX_DIM]>,
    width: Option<T>,
    r0: RExp<T>,
) -> Result<GridField<T>> {
    let mut mid = [T::zero(); MAX_DIM];
    for axis in 0..grid.dim() {
        let [a, b] = grid.extent(axis);
        mid[axis] = (a + b) * cast::<T>(0.5);
    }
    let center = center.unwrap_or(mid);
    for axis in 0..grid.dim() {
        let [a, b] = grid.extent(axis);
        if center[axis] < a || center[axis] > b {
            return Err(Error::OutOfDomain(format!(
                "spike center {} outside [{a}, {b}]",
                center[axis]
            )));
        }
    }
    let mut coarsest = grid.spacing(0);
    for axis in 1..grid.dim() {
        coarsest = coarsest.max(grid.spacing(axis));
    }
    let width = width.unwrap_or(cast::<T>(4.0) * coarsest);
    if !(width > T::zero()) {
        return Err(Error::InvalidArgument("spike width must be positive".into()));
    }
    let nc = grid.components();
    let mut f = GridField::zeros(grid, T::zero());
    for node in 0..grid.num_nodes() {
        let pos = grid.node_position(node);
        let mut d2 = T::zero();
        for axis in 0..grid.dim() {
            let d = pos[axis] - center[axis];
            d2 += d * d;
        }
        let v = (T::one() - d2.sqrt() / width).max(T::zero());
        for comp in 0..nc {
            f.data[node * nc + comp] = v;
        }
    }
    let f = apply_dirichlet(grid, &f)?;
    let norm = lp_norm(grid, &f, r0)?;
    if !(norm > T::zero()) {
        return Err(Error::InvalidArgument(
            "spike vanishes on every interior node; widen it or refine the grid".into(),
        ));
    }
    let mut out = f;
    for v in out.data.iter_mut() {
        *v /= norm;
    }
    Ok(out)
}

/// Uniform noise in `[-1, 1]` on interior nodes, reproducible from the seed.
pub fn random_datum<T: Scalar>(grid: &Grid<T>, seed: u64) -> GridField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = grid.components();
    let mut f = GridField::zeros(grid, T::zero());
    for node in 0..grid.num_nodes() {
        if grid.is_boundary(node) {
            continue;
        }
        for comp in 0..nc {
            f.data[node * nc + comp] = cast::<T>(rng.gen_range(-1.0..1.0f64));
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sine_is_zero_on_boundary_and_peaks_at_center() {
        let grid = Grid::new(&[[0.0, 2.0], [1.0, 3.0]], &[8, 8], 1).unwrap();
        let f = sine_datum(&grid);
        for node in 0..grid.num_nodes() {
            if grid.is_boundary(node) {
                assert_eq!(f.data[node], 0.0);
            }
        }
        let center = grid.node_index(4, 4);
        assert_relative_eq!(f.data[center], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spike_normalizes_in_requested_norm() {
        for r0 in [RExp::Finite(2.0), RExp::Finite(4.0), RExp::Inf] {
            let grid = Grid::new(&[[0.0, 1.0]], &[128], 1).unwrap();
            let f = spike_datum(&grid, None, None, r0).unwrap();
            let n = lp_norm(&grid, &f, r0).unwrap();
            assert_relative_eq!(n, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spike_rejects_unresolvable_requests() {
        let grid = Grid::new(&[[0.0, 1.0]], &[16], 1).unwrap();
        assert!(spike_datum(&grid, Some([5.0, 0.0]), None, RExp::Finite(2.0)).is_err());
        assert!(spike_datum(&grid, None, Some(0.0), RExp::Finite(2.0)).is_err());
        // Width smaller than one cell around an off-node center leaves nothing.
        let tiny = spike_datum(&grid, Some([0.5 + 0.03125, 0.0]), Some(1e-4), RExp::Finite(2.0));
        assert!(tiny.is_err());
    }

    #[test]
    fn random_datum_is_reproducible_and_interior() {
        let grid = Grid::new(&[[0.0, 1.0], [0.0, 1.0]], &[6, 6], 2).unwrap();
        let a = random_datum(&grid, 9);
        let b = random_datum(&grid, 9);
        let c = random_datum(&grid, 10);
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, c.data);
        for node in 0..grid.num_nodes() {
            if grid.is_boundary(node) {
                assert_eq!(a.data[node * 2], 0.0);
                assert_eq!(a.data[node * 2 + 1], 0.0);
            }
        }
    }
}
