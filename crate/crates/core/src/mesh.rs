//! Tensor-product grids on boxes in one or two space dimensions, nodal fields
//! with homogeneous Dirichlet boundaries, and the discrete calculus the solver
//! is built on.
//!
//! Values live on nodes; gradients live on cells. The cell gradient is the
//! forward difference of face-averaged node values, evaluated at cell centers,
//! and the divergence is defined as its negative adjoint with respect to the
//! trapezoid (nodes) and midpoint (cells) inner products. Summation by parts
//! therefore holds to rounding, not just to truncation order, which is what
//! makes the energy bookkeeping downstream exact.

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

pub const MAX_DIM: usize = 2;

/// Uniform tensor-product grid over `[a1,b1] x [a2,b2]` (second axis absent in 1D).
///
/// Node indexing is row-major with axis 1 fastest: node `(i1, i2)` has flat
/// index `i2 * (m1 + 1) + i1`. Cells use the same convention.
#[derive(Debug, Clone)]
pub struct Grid<T: Scalar> {
    dim: usize,
    extents: [[T; 2]; MAX_DIM],
    cells: [usize; MAX_DIM],
    spacing: [T; MAX_DIM],
    components: usize,
    node_weights: Vec<T>,
    boundary: Vec<bool>,
}

impl<T: Scalar> Grid<T> {
    /// `cells[a]` is the number of cells along axis `a`; nodes are `cells[a] + 1`.
    pub fn new(extents: &[[T; 2]], cells: &[usize], components: usize) -> Result<Self> {
        let dim = extents.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if cells.len() != dim {
            return Err(Error::Grid("extents and cell counts disagree on dimension".into()));
        }
        if components == 0 {
            return Err(Error::Grid("at least one field component required".into()));
        }
        let mut ext = [[T::zero(); 2]; MAX_DIM];
        let mut m = [1usize; MAX_DIM];
        let mut h = [T::one(); MAX_DIM];
        for a in 0..dim {
            let [lo, hi] = extents[a];
            if !(hi > lo) {
                return Err(Error::Grid(format!("axis {a} extent is empty or reversed")));
            }
            if cells[a] < 2 {
                return Err(Error::Grid(format!("axis {a} needs at least 2 cells")));
            }
            ext[a] = [lo, hi];
            m[a] = cells[a];
            h[a] = (hi - lo) / cast::<T>(cells[a] as f64);
        }
        let mut grid = Grid {
            dim,
            extents: ext,
            cells: m,
            spacing: h,
            components,
            node_weights: Vec::new(),
            boundary: Vec::new(),
        };
        grid.precompute();
        Ok(grid)
    }

    fn precompute(&mut self) {
        let nodes = self.num_nodes();
        let mut weights = Vec::with_capacity(nodes);
        let mut boundary = Vec::with_capacity(nodes);
        let half = cast::<T>(0.5);
        for idx in 0..nodes {
            let (i1, i2) = self.node_multi(idx);
            let mut w = self.spacing[0] * if i1 == 0 || i1 == self.cells[0] { half } else { T::one() };
            let mut b = i1 == 0 || i1 == self.cells[0];
            if self.dim == 2 {
                w = w * self.spacing[1] * if i2 == 0 || i2 == self.cells[1] { half } else { T::one() };
                b = b || i2 == 0 || i2 == self.cells[1];
            }
            weights.push(w);
            boundary.push(b);
        }
        self.node_weights = weights;
        self.boundary = boundary;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn cells_along(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn nodes_along(&self, axis: usize) -> usize {
        self.cells[axis] + 1
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    pub fn extent(&self, axis: usize) -> [T; 2] {
        self.extents[axis]
    }

    pub fn num_nodes(&self) -> usize {
        let mut n = self.cells[0] + 1;
        if self.dim == 2 {
            n *= self.cells[1] + 1;
        }
        n
    }

    pub fn num_cells(&self) -> usize {
        let mut n = self.cells[0];
        if self.dim == 2 {
            n *= self.cells[1];
        }
        n
    }

    /// Volume of a single cell.
    pub fn cell_volume(&self) -> T {
        let mut v = self.spacing[0];
        if self.dim == 2 {
            v *= self.spacing[1];
        }
        v
    }

    /// Measure of the whole box.
    pub fn domain_measure(&self) -> T {
        let mut v = self.extents[0][1] - self.extents[0][0];
        if self.dim == 2 {
            v *= self.extents[1][1] - self.extents[1][0];
        }
        v
    }

    #[inline]
    pub fn node_index(&self, i1: usize, i2: usize) -> usize {
        i2 * (self.cells[0] + 1) + i1
    }

    #[inline]
    pub fn cell_index(&self, c1: usize, c2: usize) -> usize {
        c2 * self.cells[0] + c1
    }

    #[inline]
    pub fn node_multi(&self, idx: usize) -> (usize, usize) {
        let n1 = self.cells[0] + 1;
        (idx % n1, idx / n1)
    }

    #[inline]
    pub fn cell_multi(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells[0], idx / self.cells[0])
    }

    pub fn node_position(&self, idx: usize) -> [T; MAX_DIM] {
        let (i1, i2) = self.node_multi(idx);
        let mut p = [T::zero(); MAX_DIM];
        p[0] = self.extents[0][0] + self.spacing[0] * cast::<T>(i1 as f64);
        if self.dim == 2 {
            p[1] = self.extents[1][0] + self.spacing[1] * cast::<T>(i2 as f64);
        }
        p
    }

    pub fn cell_center(&self, idx: usize) -> [T; MAX_DIM] {
        let (c1, c2) = self.cell_multi(idx);
        let half = cast::<T>(0.5);
        let mut p = [T::zero(); MAX_DIM];
        p[0] = self.extents[0][0] + self.spacing[0] * (cast::<T>(c1 as f64) + half);
        if self.dim == 2 {
            p[1] = self.extents[1][0] + self.spacing[1] * (cast::<T>(c2 as f64) + half);
        }
        p
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        self.boundary[idx]
    }

    /// Trapezoid quadrature weight of a node (product of per-axis weights).
    #[inline]
    pub fn node_weight(&self, idx: usize) -> T {
        self.node_weights[idx]
    }

    /// True when `other` describes the same discretization (same box, cells,
    /// component count); fields are interchangeable between such grids.
    pub fn same_layout(&self, other: &Grid<T>) -> bool {
        self.dim == other.dim
            && self.components == other.components
            && self.cells == other.cells
            && self.extents == other.extents
    }
}

/// Nodal field with `components` values per node, tagged with the time it
/// represents. Data is node-major: `data[node * components + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T: Scalar> {
    pub data: Vec<T>,
    pub time: T,
}

impl<T: Scalar> GridField<T> {
    pub fn zeros(grid: &Grid<T>, time: T) -> Self {
        GridField { data: vec![T::zero(); grid.num_nodes() * grid.components()], time }
    }

    pub fn from_vec(grid: &Grid<T>, data: Vec<T>, time: T) -> Result<Self> {
        if data.len() != grid.num_nodes() * grid.components() {
            return Err(Error::Grid(format!(
                "field length {} does not match grid ({} nodes x {} components)",
                data.len(),
                grid.num_nodes(),
                grid.components()
            )));
        }
        Ok(GridField { data, time })
    }

    pub fn matches(&self, grid: &Grid<T>) -> bool {
        self.data.len() == grid.num_nodes() * grid.components()
    }

    #[inline]
    pub fn value(&self, components: usize, node: usize, comp: usize) -> T {
        self.data[node * components + comp]
    }

    /// Euclidean modulus over components at one node.
    pub fn modulus(&self, components: usize, node: usize) -> T {
        let base = node * components;
        let mut s = T::zero();
        for k in 0..components {
            let v = self.data[base + k];
            s += v * v;
        }
        s.sqrt()
    }
}

/// Per-cell gradient: `dim x components` entries per cell, laid out
/// `data[(cell * dim + axis) * components + comp]`. Doubles as the container
/// for any cell-valued flux when feeding [`discrete_divergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellGradient<T: Scalar> {
    pub data: Vec<T>,
    pub time: T,
}

impl<T: Scalar> CellGradient<T> {
    pub fn zeros(grid: &Grid<T>, time: T) -> Self {
        CellGradient {
            data: vec![T::zero(); grid.num_cells() * grid.dim() * grid.components()],
            time,
        }
    }

    pub fn matches(&self, grid: &Grid<T>) -> bool {
        self.data.len() == grid.num_cells() * grid.dim() * grid.components()
    }

    /// Frobenius modulus of the `dim x components` block of one cell.
    pub fn modulus_squared(&self, grid: &Grid<T>, cell: usize) -> T {
        let nk = grid.dim() * grid.components();
        let base = cell * nk;
        let mut s = T::zero();
        for v in &self.data[base..base + nk] {
            s += *v * *v;
        }
        s
    }
}

/// Zeroes every boundary node; interior values are kept. Returns a new field.
pub fn apply_dirichlet<T: Scalar>(grid: &Grid<T>, field: &GridField<T>) -> Result<GridField<T>> {
    check_field(grid, field)?;
    let nc = grid.components();
    let mut out = field.clone();
    for node in 0..grid.num_nodes() {
        if grid.is_boundary(node) {
            for k in 0..nc {
                out.data[node * nc + k] = T::zero();
            }
        }
    }
    Ok(out)
}

fn check_field<T: Scalar>(grid: &Grid<T>, field: &GridField<T>) -> Result<()> {
    if !field.matches(grid) {
        return Err(Error::Grid("field shape does not match grid".into()));
    }
    Ok(())
}

fn check_flux<T: Scalar>(grid: &Grid<T>, flux: &CellGradient<T>) -> Result<()> {
    if !flux.matches(grid) {
        return Err(Error::Grid("cell data shape does not match grid".into()));
    }
    Ok(())
}

/// Forward-difference gradient at cell centers. In 2D each axis derivative is
/// the difference of the two face-averaged node values, which is exact for
/// affine fields and second-order accurate for smooth ones.
pub fn discrete_gradient<T: Scalar>(grid: &Grid<T>, field: &GridField<T>) -> Result<CellGradient<T>> {
    check_field(grid, field)?;
    let nc = grid.components();
    let dim = grid.dim();
    let mut out = CellGradient::zeros(grid, field.time);
    let h1 = grid.spacing(0);
    if dim == 1 {
        for c in 0..grid.num_cells() {
            for k in 0..nc {
                let lo = field.data[c * nc + k];
                let hi = field.data[(c + 1) * nc + k];
                out.data[c * nc + k] = (hi - lo) / h1;
            }
        }
        return Ok(out);
    }
    let h2 = grid.spacing(1);
    let two = cast::<T>(2.0);
    for cell in 0..grid.num_cells() {
        let (c1, c2) = grid.cell_multi(cell);
        let n00 = grid.node_index(c1, c2);
        let n10 = grid.node_index(c1 + 1, c2);
        let n01 = grid.node_index(c1, c2 + 1);
        let n11 = grid.node_index(c1 + 1, c2 + 1);
        for k in 0..nc {
            let f00 = field.data[n00 * nc + k];
            let f10 = field.data[n10 * nc + k];
            let f01 = field.data[n01 * nc + k];
            let f11 = field.data[n11 * nc + k];
            out.data[(cell * dim) * nc + k] = (f10 + f11 - f00 - f01) / (two * h1);
            out.data[(cell * dim + 1) * nc + k] = (f01 + f11 - f00 - f10) / (two * h2);
        }
    }
    Ok(out)
}

/// Divergence of a cell flux, defined as the negative adjoint of
/// [`discrete_gradient`]: `<grad u, F>_cells = -<u, div F>_nodes` exactly, for
/// every `u` vanishing on the boundary. Boundary rows of the result are zero.
pub fn discrete_divergence<T: Scalar>(grid: &Grid<T>, flux: &CellGradient<T>) -> Result<GridField<T>> {
    check_flux(grid, flux)?;
    let nc = grid.components();
    let dim = grid.dim();
    let mut out = GridField::zeros(grid, flux.time);
    let h1 = grid.spacing(0);
    if dim == 1 {
        // Backward difference of the cell flux at interior nodes.
        for i in 1..grid.cells_along(0) {
            for k in 0..nc {
                let left = flux.data[(i - 1) * nc + k];
                let right = flux.data[i * nc + k];
                out.data[i * nc + k] = (right - left) / h1;
            }
        }
        return Ok(out);
    }
    let h2 = grid.spacing(1);
    let two_h1 = cast::<T>(2.0) * h1;
    let two_h2 = cast::<T>(2.0) * h2;
    for i2 in 1..grid.cells_along(1) {
        for i1 in 1..grid.cells_along(0) {
            let node = grid.node_index(i1, i2);
            let c_ll = grid.cell_index(i1 - 1, i2 - 1);
            let c_rl = grid.cell_index(i1, i2 - 1);
            let c_lr = grid.cell_index(i1 - 1, i2);
            let c_rr = grid.cell_index(i1, i2);
            for k in 0..nc {
                let f1 = |c: usize| flux.data[(c * 2) * nc + k];
                let f2 = |c: usize| flux.data[(c * 2 + 1) * nc + k];
                let d1 = (f1(c_rl) + f1(c_rr)) - (f1(c_ll) + f1(c_lr));
                let d2 = (f2(c_lr) + f2(c_rr)) - (f2(c_ll) + f2(c_rl));
                out.data[node * nc + k] = d1 / two_h1 + d2 / two_h2;
            }
        }
    }
    Ok(out)
}

/// Trapezoid-rule integral of a scalar sample per node.
pub fn integrate_nodes<T: Scalar>(grid: &Grid<T>, samples: &[T]) -> Result<T> {
    if samples.len() != grid.num_nodes() {
        return Err(Error::Grid("nodal sample length mismatch".into()));
    }
    let mut acc = T::zero();
    for (idx, v) in samples.iter().enumerate() {
        acc += grid.node_weight(idx) * *v;
    }
    Ok(acc)
}

/// Midpoint-rule integral of a scalar sample per cell.
pub fn integrate_cells<T: Scalar>(grid: &Grid<T>, samples: &[T]) -> Result<T> {
    if samples.len() != grid.num_cells() {
        return Err(Error::Grid("cell sample length mismatch".into()));
    }
    let vol = grid.cell_volume();
    let mut acc = T::zero();
    for v in samples {
        acc += *v;
    }
    Ok(acc * vol)
}

/// Weighted nodal inner product `sum_i w_i <u_i, v_i>` over all components.
pub fn dot_nodes<T: Scalar>(grid: &Grid<T>, u: &GridField<T>, v: &GridField<T>) -> Result<T> {
    check_field(grid, u)?;
    check_field(grid, v)?;
    let nc = grid.components();
    let mut acc = T::zero();
    for node in 0..grid.num_nodes() {
        let w = grid.node_weight(node);
        let base = node * nc;
        let mut s = T::zero();
        for k in 0..nc {
            s += u.data[base + k] * v.data[base + k];
        }
        acc += w * s;
    }
    Ok(acc)
}

/// Cell inner product `vol * sum_c <A_c, B_c>` over all axes and components.
pub fn dot_cells<T: Scalar>(grid: &Grid<T>, a: &CellGradient<T>, b: &CellGradient<T>) -> Result<T> {
    check_flux(grid, a)?;
    check_flux(grid, b)?;
    let mut acc = T::zero();
    for (x, y) in a.data.iter().zip(&b.data) {
        acc += *x * *y;
    }
    Ok(acc * grid.cell_volume())
}

/// Halves the spacing along every axis and transfers `field` by multilinear
/// interpolation; coarse nodes are reproduced exactly.
pub fn refine<T: Scalar>(grid: &Grid<T>, field: &GridField<T>) -> Result<(Grid<T>, GridField<T>)> {
    check_field(grid, field)?;
    let dim = grid.dim();
    let nc = grid.components();
    let mut cells = Vec::with_capacity(dim);
    let mut extents = Vec::with_capacity(dim);
    for a in 0..dim {
        cells.push(grid.cells_along(a) * 2);
        extents.push(grid.extent(a));
    }
    let fine = Grid::new(&extents, &cells, nc)?;
    let mut out = GridField::zeros(&fine, field.time);
    let half = cast::<T>(0.5);
    let quarter = cast::<T>(0.25);
    for node in 0..fine.num_nodes() {
        let (i1, i2) = fine.node_multi(node);
        let (q1, r1) = (i1 / 2, i1 % 2);
        let (q2, r2) = (i2 / 2, i2 % 2);
        for k in 0..nc {
            let at = |j1: usize, j2: usize| field.data[grid.node_index(j1, j2) * nc + k];
            let v = match (r1, r2) {
                (0, 0) => at(q1, q2),
                (1, 0) => (at(q1, q2) + at(q1 + 1, q2)) * half,
                (0, 1) => (at(q1, q2) + at(q1, q2 + 1)) * half,
                _ => (at(q1, q2) + at(q1 + 1, q2) + at(q1, q2 + 1) + at(q1 + 1, q2 + 1)) * quarter,
            };
            out.data[node * nc + k] = v;
        }
    }
    Ok((fine, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn grid_1d(m: usize) -> Grid<f64> {
        Grid::new(&[[0.0, 1.0]], &[m], 1).unwrap()
    }

    fn grid_2d(m1: usize, m2: usize, nc: usize) -> Grid<f64> {
        Grid::new(&[[0.0, 1.0], [0.0, 1.0]], &[m1, m2], nc).unwrap()
    }

    fn random_field(grid: &Grid<f64>, rng: &mut ChaCha8Rng, zero_boundary: bool) -> GridField<f64> {
        let mut f = GridField::zeros(grid, 0.0);
        for v in f.data.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        if zero_boundary {
            f = apply_dirichlet(grid, &f).unwrap();
        }
        f
    }

    fn random_flux(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> CellGradient<f64> {
        let mut f = CellGradient::zeros(grid, 0.0);
        for v in f.data.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        f
    }

    #[test]
    fn gradient_of_affine_field_is_exact() {
        let grid = grid_2d(7, 5, 1);
        let mut f = GridField::zeros(&grid, 0.0);
        for node in 0..grid.num_nodes() {
            let p = grid.node_position(node);
            f.data[node] = 3.0 * p[0] + 4.0 * p[1];
        }
        let g = discrete_gradient(&grid, &f).unwrap();
        for cell in 0..grid.num_cells() {
            assert_relative_eq!(g.data[cell * 2], 3.0, max_relative = 1e-13);
            assert_relative_eq!(g.data[cell * 2 + 1], 4.0, max_relative = 1e-13);
            assert_relative_eq!(g.modulus_squared(&grid, cell).sqrt(), 5.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn divergence_of_constant_flux_vanishes_at_interior_nodes() {
        for grid in [grid_2d(6, 9, 1), grid_2d(4, 4, 2)] {
            let mut flux = CellGradient::zeros(&grid, 0.0);
            for cell in 0..grid.num_cells() {
                for k in 0..grid.components() {
                    flux.data[(cell * 2) * grid.components() + k] = 1.25;
                    flux.data[(cell * 2 + 1) * grid.components() + k] = -0.5;
                }
            }
            let div = discrete_divergence(&grid, &flux).unwrap();
            for v in div.data {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn summation_by_parts_is_exact_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            for grid in [grid_1d(17), grid_2d(9, 6, 1), grid_2d(5, 7, 3)] {
                let u = random_field(&grid, &mut rng, true);
                let flux = random_flux(&grid, &mut rng);
                let gu = discrete_gradient(&grid, &u).unwrap();
                let div = discrete_divergence(&grid, &flux).unwrap();
                let lhs = dot_cells(&grid, &gu, &flux).unwrap();
                let rhs = -dot_nodes(&grid, &u, &div).unwrap();
                let scale = 1.0
                    + dot_cells(&grid, &gu, &gu).unwrap().sqrt()
                        * dot_cells(&grid, &flux, &flux).unwrap().sqrt();
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * scale,
                    "summation by parts broke: lhs={lhs} rhs={rhs}"
                );
            }
        }
    }

    #[test]
    fn gradient_consistency_is_second_order_on_smooth_fields() {
        let mut errors = Vec::new();
        for m in [8usize, 16, 32] {
            let grid = grid_2d(m, m, 1);
            let mut f = GridField::zeros(&grid, 0.0);
            for node in 0..grid.num_nodes() {
                let p = grid.node_position(node);
                f.data[node] = (std::f64::consts::PI * p[0]).sin() * (std::f64::consts::PI * p[1]).sin();
            }
            let g = discrete_gradient(&grid, &f).unwrap();
            let mut worst: f64 = 0.0;
            for cell in 0..grid.num_cells() {
                let c = grid.cell_center(cell);
                let pi = std::f64::consts::PI;
                let exact = [
                    pi * (pi * c[0]).cos() * (pi * c[1]).sin(),
                    pi * (pi * c[0]).sin() * (pi * c[1]).cos(),
                ];
                worst = worst
                    .max((g.data[cell * 2] - exact[0]).abs())
                    .max((g.data[cell * 2 + 1] - exact[1]).abs());
            }
            errors.push(worst);
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        assert!(order1 > 0.9 && order2 > 0.9, "observed orders {order1:.2}, {order2:.2}");
    }

    #[test]
    fn refine_reproduces_coarse_nodes_and_interpolates_smoothly() {
        let grid = grid_1d(16);
        let mut f = GridField::zeros(&grid, 0.3);
        for node in 0..grid.num_nodes() {
            let x = grid.node_position(node)[0];
            f.data[node] = (std::f64::consts::PI * x).sin();
        }
        let (fine, g) = refine(&grid, &f).unwrap();
        assert_eq!(fine.num_nodes(), 33);
        assert_eq!(g.time, 0.3);
        for node in 0..grid.num_nodes() {
            let (i1, _) = grid.node_multi(node);
            assert_eq!(g.data[fine.node_index(2 * i1, 0)], f.data[node]);
        }
        let mut worst: f64 = 0.0;
        for node in 0..fine.num_nodes() {
            let x = fine.node_position(node)[0];
            worst = worst.max((g.data[node] - (std::f64::consts::PI * x).sin()).abs());
        }
        // Piecewise-linear interpolation error of sin on h=1/16 is ~ (h/2)^2 * pi^2 / 2.
        assert!(worst < 5e-3, "interpolation error {worst}");
    }

    #[test]
    fn integrate_nodes_matches_closed_forms() {
        let grid = grid_1d(1000);
        let samples: Vec<f64> = (0..grid.num_nodes())
            .map(|i| {
                let x = grid.node_position(i)[0];
                x * x
            })
            .collect();
        let v = integrate_nodes(&grid, &samples).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-6);

        let g2 = grid_2d(40, 40, 1);
        let ones = vec![1.0; g2.num_cells()];
        assert_relative_eq!(integrate_cells(&g2, &ones).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn dirichlet_projection_zeroes_exactly_the_boundary() {
        let grid = grid_2d(5, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_field(&grid, &mut rng, false);
        let g = apply_dirichlet(&grid, &f).unwrap();
        for node in 0..grid.num_nodes() {
            for k in 0..2 {
                let v = g.data[node * 2 + k];
                if grid.is_boundary(node) {
                    assert_eq!(v, 0.0);
                } else {
                    assert_eq!(v, f.data[node * 2 + k]);
                }
            }
        }
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(Grid::<f64>::new(&[[0.0, 1.0]], &[1], 1).is_err());
        assert!(Grid::<f64>::new(&[[1.0, 1.0]], &[4], 1).is_err());
        assert!(Grid::<f64>::new(&[[0.0, 1.0], [0.0, 1.0]], &[4, 4], 0).is_err());
        assert!(Grid::<f64>::new(&[], &[], 1).is_err());
    }
}
