//! Finite-volume solver and verification toolkit for diffusion with a
//! space-and-time-dependent power-law flux.
//!
//! The flow under study is `u_t = div((mu + |grad u|^2)^((p(t,x)-2)/2) grad u)`
//! on an axis-aligned box with homogeneous Dirichlet boundary, optionally with
//! an extra linear viscosity. The crate provides:
//!
//! - exponent fields with bound extraction and a log-regularity probe
//!   ([`exponent`]),
//! - grids, discrete gradient and divergence built as exact negative adjoints
//!   of one another ([`mesh`]),
//! - fixed and variable-exponent norms ([`norms`]),
//! - the implicit minimizing-movement time stepper ([`dynamics`]),
//! - the frozen-coefficient backward flow and duality certificates
//!   ([`adjoint`]),
//! - decay-rate formulas and structural audits ([`diagnostics`]),
//! - initial data and CSV interchange ([`initial`], [`io`]).
//!
//! Everything is generic over the floating-point type through [`Scalar`];
//! the `*64` and `*32` aliases below pin the two supported precisions.

// Validation guards are written as negated comparisons (`!(x > 0)`) on
// purpose: they must reject NaN, which the un-negated form would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Kernels index several parallel arrays by cell or node; zipped iterators
// would obscure the stencil arithmetic.
#![allow(clippy::needless_range_loop)]

pub mod adjoint;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod exponent;
pub mod initial;
pub mod io;
pub mod mesh;
pub mod norms;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use adjoint::{AdjointParams, AdjointTrajectory, FrozenCoefficients};
pub use diagnostics::GammaPair;
pub use dynamics::{SolveError, StepParams, StepStats, Trajectory};
pub use exponent::{ExponentField, ExponentSpec, SpaceTimeBox};
pub use mesh::{CellGradient, Grid, GridField};
pub use norms::{NormRecord, RExp};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type GridField64 = GridField<f64>;
pub type GridField32 = GridField<f32>;
pub type CellGradient64 = CellGradient<f64>;
pub type CellGradient32 = CellGradient<f32>;
pub type ExponentField64 = ExponentField<f64>;
pub type ExponentField32 = ExponentField<f32>;
pub type StepParams64 = StepParams<f64>;
pub type StepParams32 = StepParams<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type AdjointParams64 = AdjointParams<f64>;
pub type AdjointParams32 = AdjointParams<f32>;
pub type RExp64 = RExp<f64>;
pub type RExp32 = RExp<f32>;
