//! Variable exponents p(t,x): constructors, pointwise evaluation, bound
//! estimation over a space-time box, and a sampled log-modulus-of-continuity
//! estimate used to flag exponents too rough for the theory downstream.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::MAX_DIM;
use crate::scalar::{cast, Scalar};

/// Closed box `[t0,t1] x [a1,b1] (x [a2,b2])` the exponent is considered on.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBox<T: Scalar> {
    pub dim: usize,
    pub time: [T; 2],
    pub space: [[T; 2]; MAX_DIM],
}

impl<T: Scalar> SpaceTimeBox<T> {
    pub fn new(time: [T; 2], space: &[[T; 2]]) -> Result<Self> {
        let dim = space.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("space dimension must be 1 or 2, got {dim}")));
        }
        if time[1] < time[0] {
            return Err(Error::InvalidArgument("time interval reversed".into()));
        }
        let mut sp = [[T::zero(); 2]; MAX_DIM];
        for (a, r) in space.iter().enumerate() {
            if !(r[1] > r[0]) {
                return Err(Error::InvalidArgument(format!("space axis {a} interval empty")));
            }
            sp[a] = *r;
        }
        Ok(SpaceTimeBox { dim, time, space: sp })
    }

    pub fn contains(&self, t: T, x: &[T]) -> bool {
        if t < self.time[0] || t > self.time[1] {
            return false;
        }
        for a in 0..self.dim {
            if x[a] < self.space[a][0] || x[a] > self.space[a][1] {
                return false;
            }
        }
        true
    }

    /// Sum of the time span and the Euclidean space diagonal; the natural
    /// scale for pair distances inside the box.
    fn diameter(&self) -> T {
        let mut d2 = T::zero();
        for a in 0..self.dim {
            let e = self.space[a][1] - self.space[a][0];
            d2 += e * e;
        }
        (self.time[1] - self.time[0]) + d2.sqrt()
    }
}

/// Exponent values on a tensor grid of sample coordinates, interpolated
/// multilinearly in time and space. Queries outside the sampled box fail.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentTable<T: Scalar> {
    dim: usize,
    t_coords: Vec<T>,
    x_coords: [Vec<T>; MAX_DIM],
    /// Layout `[t][x2][x1]`, axis 1 fastest.
    values: Vec<T>,
}

impl<T: Scalar> ExponentTable<T> {
    pub fn new(t_coords: Vec<T>, x_coords: Vec<Vec<T>>, values: Vec<T>) -> Result<Self> {
        let dim = x_coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument("table space dimension must be 1 or 2".into()));
        }
        let check_sorted = |name: &str, v: &[T]| -> Result<()> {
            if v.len() < 2 {
                return Err(Error::InvalidArgument(format!("table needs >= 2 {name} samples")));
            }
            if v.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidArgument(format!("{name} samples must strictly increase")));
            }
            Ok(())
        };
        check_sorted("time", &t_coords)?;
        let mut expected = t_coords.len();
        let mut xc: [Vec<T>; MAX_DIM] = [Vec::new(), Vec::new()];
        for (a, coords) in x_coords.into_iter().enumerate() {
            check_sorted("space", &coords)?;
            expected *= coords.len();
            xc[a] = coords;
        }
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "table has {} values, expected {expected} for a full tensor grid",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("exponent table values".into()));
        }
        Ok(ExponentTable { dim, t_coords, x_coords: xc, values })
    }

    /// Assembles a table from scattered `(t, x, p)` rows; the rows must cover a
    /// full tensor grid of their distinct coordinates (bitwise comparison).
    pub fn from_scattered(dim: usize, rows: &[(T, [T; MAX_DIM], T)]) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument("table space dimension must be 1 or 2".into()));
        }
        let mut ts: Vec<T> = Vec::new();
        let mut xs: [Vec<T>; MAX_DIM] = [Vec::new(), Vec::new()];
        let push_unique = |list: &mut Vec<T>, v: T| {
            if !list.contains(&v) {
                list.push(v);
            }
        };
        for (t, x, _) in rows {
            push_unique(&mut ts, *t);
            for a in 0..dim {
                push_unique(&mut xs[a], x[a]);
            }
        }
        let sort = |list: &mut Vec<T>| list.sort_by(|a, b| a.partial_cmp(b).expect("finite coords"));
        sort(&mut ts);
        for a in 0..dim {
            sort(&mut xs[a]);
        }
        let n1 = xs[0].len();
        let n2 = if dim == 2 { xs[1].len() } else { 1 };
        let total = ts.len() * n1 * n2;
        if rows.len() != total {
            return Err(Error::InvalidArgument(format!(
                "{} rows do not form a full tensor grid ({} expected)",
                rows.len(),
                total
            )));
        }
        let index_of = |list: &[T], v: T| list.iter().position(|w| *w == v).unwrap();
        let mut values = vec![T::nan(); total];
        for (t, x, p) in rows {
            let it = index_of(&ts, *t);
            let i1 = index_of(&xs[0], x[0]);
            let i2 = if dim == 2 { index_of(&xs[1], x[1]) } else { 0 };
            let slot = &mut values[(it * n2 + i2) * n1 + i1];
            if !slot.is_nan() {
                return Err(Error::InvalidArgument("duplicate table coordinate".into()));
            }
            *slot = *p;
        }
        ExponentTable::new(ts, xs[..dim].to_vec(), values)
    }

    fn bracket(coords: &[T], v: T) -> Option<(usize, T)> {
        let n = coords.len();
        if v < coords[0] || v > coords[n - 1] {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if coords[mid] <= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let span = coords[lo + 1] - coords[lo];
        Some((lo, (v - coords[lo]) / span))
    }

    /// Multilinear interpolation at `(t, x)`; coordinates outside the sampled
    /// ranges are an error rather than an extrapolation.
    pub fn eval(&self, t: T, x: &[T]) -> Result<T> {
        let (it, wt) = Self::bracket(&self.t_coords, t)
            .ok_or_else(|| Error::OutOfDomain(format!("time {t} outside exponent table")))?;
        let (i1, w1) = Self::bracket(&self.x_coords[0], x[0])
            .ok_or_else(|| Error::OutOfDomain(format!("x1 = {} outside exponent table", x[0])))?;
        let n1 = self.x_coords[0].len();
        let (i2, w2, n2) = if self.dim == 2 {
            let (i2, w2) = Self::bracket(&self.x_coords[1], x[1])
                .ok_or_else(|| Error::OutOfDomain(format!("x2 = {} outside exponent table", x[1])))?;
            (i2, w2, self.x_coords[1].len())
        } else {
            (0, T::zero(), 1)
        };
        let at = |jt: usize, j2: usize, j1: usize| self.values[(jt * n2 + j2) * n1 + j1];
        let one = T::one();
        let mut acc = T::zero();
        for (dt, ft) in [(0usize, one - wt), (1, wt)] {
            if ft == T::zero() && dt == 1 {
                continue;
            }
            for (d2, f2) in [(0usize, one - w2), (1, w2)] {
                if self.dim == 1 && d2 == 1 {
                    continue;
                }
                let f2 = if self.dim == 1 { one } else { f2 };
                if f2 == T::zero() && d2 == 1 {
                    continue;
                }
                for (d1, f1) in [(0usize, one - w1), (1, w1)] {
                    if f1 == T::zero() && d1 == 1 {
                        continue;
                    }
                    acc += ft * f2 * f1 * at(it + dt, i2 + d2, i1 + d1);
                }
            }
        }
        Ok(acc)
    }
}

/// Functional form of an exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentSpec<T: Scalar> {
    /// `p = value` everywhere.
    Constant(T),
    /// `p = intercept + slope . x`, time-independent.
    Affine { intercept: T, slope: [T; MAX_DIM] },
    /// `p = base + amplitude * sin(2 pi (freq_t t + freq_x . x) + phase)`.
    Sinusoid { base: T, amplitude: T, freq_t: T, freq_x: [T; MAX_DIM], phase: T },
    /// Multilinear interpolation of tabulated samples.
    Table(ExponentTable<T>),
    /// Jump along the first space axis: `left` for `x1 < threshold`, else
    /// `right`. Deliberately discontinuous; exists so the roughness estimator
    /// has something to reject, and is not reachable from run configurations.
    Step { left: T, right: T, threshold: T },
    /// `max(2, inner)`; the growth exponent attached to an exponent p.
    FlooredAtTwo(Box<ExponentSpec<T>>),
}

impl<T: Scalar> ExponentSpec<T> {
    fn eval(&self, t: T, x: &[T]) -> Result<T> {
        match self {
            ExponentSpec::Constant(v) => Ok(*v),
            ExponentSpec::Affine { intercept, slope } => {
                let mut p = *intercept;
                for (a, xv) in x.iter().enumerate() {
                    p += slope[a] * *xv;
                }
                Ok(p)
            }
            ExponentSpec::Sinusoid { base, amplitude, freq_t, freq_x, phase } => {
                let two_pi = cast::<T>(2.0) * T::PI();
                let mut arg = *freq_t * t;
                for (a, xv) in x.iter().enumerate() {
                    arg += freq_x[a] * *xv;
                }
                Ok(*base + *amplitude * (two_pi * arg + *phase).sin())
            }
            ExponentSpec::Table(table) => table.eval(t, x),
            ExponentSpec::Step { left, right, threshold } => {
                Ok(if x[0] < *threshold { *left } else { *right })
            }
            ExponentSpec::FlooredAtTwo(inner) => Ok(inner.eval(t, x)?.max(cast::<T>(2.0))),
        }
    }
}

/// An exponent spec validated over a box: evaluable pointwise, with sampled
/// lower and upper bounds. Construction fails when the sampled minimum is <= 1.
#[derive(Debug, Clone)]
pub struct ExponentField<T: Scalar> {
    spec: ExponentSpec<T>,
    domain: SpaceTimeBox<T>,
    p_minus: T,
    p_plus: T,
}

impl<T: Scalar> ExponentField<T> {
    /// `resolution` is the number of lattice points per axis (time included)
    /// used for bound estimation; bounds are exact for constant/affine specs
    /// and for tables whose samples the lattice hits, approximate otherwise.
    pub fn new(spec: ExponentSpec<T>, domain: SpaceTimeBox<T>, resolution: usize) -> Result<Self> {
        let (p_minus, p_plus) = sample_bounds(&spec, &domain, resolution)?;
        if p_minus <= T::one() {
            return Err(Error::InvalidExponent(format!(
                "sampled minimum {p_minus} is <= 1 on the requested box"
            )));
        }
        Ok(ExponentField { spec, domain, p_minus, p_plus })
    }

    pub fn spec(&self) -> &ExponentSpec<T> {
        &self.spec
    }

    pub fn domain(&self) -> &SpaceTimeBox<T> {
        &self.domain
    }

    pub fn p_minus(&self) -> T {
        self.p_minus
    }

    pub fn p_plus(&self) -> T {
        self.p_plus
    }

    /// Pointwise value. Analytic specs accept any point; tabulated specs
    /// reject points outside their sampled box.
    pub fn eval(&self, t: T, x: &[T]) -> Result<T> {
        self.spec.eval(t, x)
    }

    /// The growth exponent `q = max(2, p)` as a field in its own right, with
    /// bounds floored accordingly (exact: flooring commutes with inf/sup).
    pub fn floored_at_two(&self) -> ExponentField<T> {
        let two = cast::<T>(2.0);
        ExponentField {
            spec: ExponentSpec::FlooredAtTwo(Box::new(self.spec.clone())),
            domain: self.domain.clone(),
            p_minus: self.p_minus.max(two),
            p_plus: self.p_plus.max(two),
        }
    }
}

/// Lattice min/max of a spec over a box. Fails when the minimum is <= 1 or a
/// sample is non-finite.
pub fn exponent_bounds<T: Scalar>(
    field: &ExponentField<T>,
    domain: &SpaceTimeBox<T>,
    resolution: usize,
) -> Result<(T, T)> {
    let (lo, hi) = sample_bounds(&field.spec, domain, resolution)?;
    if lo <= T::one() {
        return Err(Error::InvalidExponent(format!("sampled minimum {lo} is <= 1")));
    }
    Ok((lo, hi))
}

fn sample_bounds<T: Scalar>(
    spec: &ExponentSpec<T>,
    domain: &SpaceTimeBox<T>,
    resolution: usize,
) -> Result<(T, T)> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("bound sampling needs >= 2 points per axis".into()));
    }
    let axis_points = |lo: T, hi: T| -> Vec<T> {
        if hi == lo {
            return vec![lo];
        }
        (0..resolution)
            .map(|i| lo + (hi - lo) * cast::<T>(i as f64) / cast::<T>((resolution - 1) as f64))
            .collect()
    };
    let ts = axis_points(domain.time[0], domain.time[1]);
    let x1s = axis_points(domain.space[0][0], domain.space[0][1]);
    let x2s = if domain.dim == 2 {
        axis_points(domain.space[1][0], domain.space[1][1])
    } else {
        vec![T::zero()]
    };
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for t in &ts {
        for x2 in &x2s {
            for x1 in &x1s {
                let p = spec.eval(*t, &[*x1, *x2][..domain.dim])?;
                if !p.is_finite() {
                    return Err(Error::NonFinite("exponent sample".into()));
                }
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
    }
    Ok((lo, hi))
}

/// One evaluated point pair and its continuity ratio.
#[derive(Debug, Clone)]
pub struct PairRatio<T: Scalar> {
    pub t_a: T,
    pub x_a: [T; MAX_DIM],
    pub t_b: T,
    pub x_b: [T; MAX_DIM],
    pub distance: T,
    pub ratio: T,
}

/// Result of sampling `|p(a) - p(b)| * ln(e + 1/dist(a,b))` over point pairs.
#[derive(Debug, Clone)]
pub struct LogHolderEstimate<T: Scalar> {
    /// Largest observed ratio; a lower bound on the true modulus constant.
    pub c1_hat: T,
    pub pairs_evaluated: usize,
    pub worst: Option<PairRatio<T>>,
}

/// Estimates the log-modulus-of-continuity constant by brute force: all pairs
/// of a fixed coarse lattice, then `pair_count` seeded random pairs, half of
/// them concentrated at log-uniformly shrinking separations (down to 1e-12
/// times nothing, i.e. absolute 1e-12) to expose jumps. Deterministic for a
/// given seed, and monotone in `pair_count`: a longer run evaluates a superset
/// of a shorter run's pairs.
pub fn estimate_log_holder<T: Scalar>(
    field: &ExponentField<T>,
    domain: &SpaceTimeBox<T>,
    pair_count: usize,
    seed: u64,
) -> Result<LogHolderEstimate<T>> {
    let mut best: Option<PairRatio<T>> = None;
    let mut evaluated = 0usize;

    let mut consider = |a: (T, [T; MAX_DIM]), b: (T, [T; MAX_DIM])| -> Result<()> {
        let mut d2 = T::zero();
        for ax in 0..domain.dim {
            let dx = a.1[ax] - b.1[ax];
            d2 += dx * dx;
        }
        let dist = (a.0 - b.0).abs() + d2.sqrt();
        if dist <= T::zero() {
            return Ok(());
        }
        let pa = field.eval(a.0, &a.1[..domain.dim])?;
        let pb = field.eval(b.0, &b.1[..domain.dim])?;
        let ratio = (pa - pb).abs() * (T::E() + dist.recip()).ln();
        evaluated += 1;
        if best.as_ref().is_none_or(|w| ratio > w.ratio) {
            best = Some(PairRatio {
                t_a: a.0,
                x_a: a.1,
                t_b: b.0,
                x_b: b.1,
                distance: dist,
                ratio,
            });
        }
        Ok(())
    };

    // Coarse lattice: 4 points per axis, all pairs. Fixed regardless of
    // pair_count so that estimates are nested.
    const LATTICE: usize = 4;
    let axis = |lo: T, hi: T, i: usize| {
        if hi == lo {
            lo
        } else {
            lo + (hi - lo) * cast::<T>(i as f64) / cast::<T>((LATTICE - 1) as f64)
        }
    };
    let mut lattice_points: Vec<(T, [T; MAX_DIM])> = Vec::new();
    for it in 0..LATTICE {
        let t = axis(domain.time[0], domain.time[1], it);
        for i2 in 0..if domain.dim == 2 { LATTICE } else { 1 } {
            for i1 in 0..LATTICE {
                let mut x = [T::zero(); MAX_DIM];
                x[0] = axis(domain.space[0][0], domain.space[0][1], i1);
                if domain.dim == 2 {
                    x[1] = axis(domain.space[1][0], domain.space[1][1], i2);
                }
                lattice_points.push((t, x));
            }
        }
    }
    for i in 0..lattice_points.len() {
        for j in (i + 1)..lattice_points.len() {
            consider(lattice_points[i], lattice_points[j])?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diam = domain.diameter().to_f64().unwrap_or(1.0);
    let uniform_point = |rng: &mut ChaCha8Rng| {
        let span = |lo: T, hi: T, u: f64| lo + (hi - lo) * cast::<T>(u);
        let t = span(domain.time[0], domain.time[1], rng.gen::<f64>());
        let mut x = [T::zero(); MAX_DIM];
        for a in 0..domain.dim {
            x[a] = span(domain.space[a][0], domain.space[a][1], rng.gen::<f64>());
        }
        (t, x)
    };
    for _ in 0..pair_count {
        let a = uniform_point(&mut rng);
        let near: bool = rng.gen();
        let b = if near {
            // Log-uniform separation pushed toward zero; exposes jumps that a
            // uniform second point would almost never straddle closely.
            let exp = rng.gen_range(-12.0..diam.log10().max(-11.0));
            let step = 10f64.powf(exp);
            let mut dir = [0.0f64; MAX_DIM + 1];
            let mut norm = 0.0;
            for d in dir.iter_mut().take(domain.dim + 1) {
                *d = rng.gen_range(-1.0..1.0);
                norm += *d * *d;
            }
            let norm = norm.sqrt().max(1e-12);
            let clamp = |v: T, lo: T, hi: T| v.max(lo).min(hi);
            let t = clamp(
                a.0 + cast::<T>(step * dir[0] / norm),
                domain.time[0],
                domain.time[1],
            );
            let mut x = a.1;
            for ax in 0..domain.dim {
                x[ax] = clamp(
                    a.1[ax] + cast::<T>(step * dir[ax + 1] / norm),
                    domain.space[ax][0],
                    domain.space[ax][1],
                );
            }
            (t, x)
        } else {
            uniform_point(&mut rng)
        };
        consider(a, b)?;
    }

    Ok(LogHolderEstimate {
        c1_hat: best.as_ref().map_or(T::zero(), |w| w.ratio),
        pairs_evaluated: evaluated,
        worst: best,
    })
}
