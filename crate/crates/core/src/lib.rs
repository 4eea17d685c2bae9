//! Numerical laboratory for axisymmetric Navier-Stokes flow in truncated cone
//! sectors `D_m = {1/m < ρ < 1, |φ − π/2| ≤ α}` with Navier-Hodge-Lions slip walls.
//!
//! The grid, operator, linear-algebra, elliptic and parabolic layers are generic
//! over [`Real`] (`f32` or `f64`); the driver, diagnostics and exact-solution
//! layers work in `f64` through the aliases below.

pub mod analytic;
pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod inequalities;
pub mod io;
pub mod linalg;
pub mod norms;
pub mod ops;
pub mod parabolic;
pub mod real;
pub mod solver;

pub use real::Real;

pub type Grid = grid::MeridianGrid<f64>;
pub type Domain = geometry::MeridianDomain<f64>;
pub type Scalar = field::ScalarField<f64>;
pub type Vector = field::VectorField<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
