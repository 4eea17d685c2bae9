//! Grid functions: scalar fields, spherical vector fields and gradient matrices.

use crate::grid::{GridError, MeridianGrid};
use crate::real::Real;
use std::sync::Arc;

/// One value per node, stored in the grid's φ-major order.
#[derive(Debug, Clone)]
pub struct ScalarField<T> {
    grid: Arc<MeridianGrid<T>>,
    data: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &Arc<MeridianGrid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: &Arc<MeridianGrid<T>>, c: T) -> Self {
        Self { grid: grid.clone(), data: vec![c; grid.len()] }
    }

    /// Samples `f(ρ, φ)` at every node.
    pub fn from_fn(grid: &Arc<MeridianGrid<T>>, mut f: impl FnMut(T, T) -> T) -> Self {
        let data = grid.nodes().map(|(i, j)| f(grid.rho(i), grid.phi(j))).collect();
        Self { grid: grid.clone(), data }
    }

    /// Samples `f(i, j)` at every node.
    pub fn from_index_fn(grid: &Arc<MeridianGrid<T>>, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let data = grid.nodes().map(|(i, j)| f(i, j)).collect();
        Self { grid: grid.clone(), data }
    }

    pub fn from_vec(grid: &Arc<MeridianGrid<T>>, data: Vec<T>) -> Result<Self, GridError> {
        if data.len() != grid.len() {
            return Err(GridError::Length { expected: grid.len(), got: data.len() });
        }
        Ok(Self { grid: grid.clone(), data })
    }

    pub fn grid(&self) -> &Arc<MeridianGrid<T>> {
        &self.grid
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.grid.idx(i, j);
        self.data[k] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Node-wise map with access to `(i, j)`.
    pub fn map_indexed(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let g = &self.grid;
        let data = g.nodes().zip(&self.data).map(|((i, j), &x)| f(i, j, x)).collect();
        Self { grid: g.clone(), data }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), data }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }
    pub fn scale(&self, c: T) -> Self {
        self.map(|x| c * x)
    }

    /// `self += c·other`.
    pub fn axpy(&mut self, c: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + c * b;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
    pub fn max(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &x| m.max(x))
    }
    pub fn min(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &x| m.min(x))
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        for (k, x) in self.data.iter().enumerate() {
            if !x.is_finite() {
                let n = self.grid.n_rho();
                return Err(GridError::NonFinite { i: k % n, j: k / n });
            }
        }
        Ok(())
    }

    /// Reflection `f(ρ, π − φ)`.
    pub fn reflect(&self) -> Self {
        let g = &self.grid;
        Self::from_index_fn(g, |i, j| self.data[g.mirror(i, j)])
    }
}

/// Spherical components `(v_ρ, v_φ, v_θ)` on a shared grid.
#[derive(Debug, Clone)]
pub struct VectorField<T> {
    pub rho: ScalarField<T>,
    pub phi: ScalarField<T>,
    pub theta: ScalarField<T>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: &Arc<MeridianGrid<T>>) -> Self {
        let z = ScalarField::zeros(grid);
        Self { rho: z.clone(), phi: z.clone(), theta: z }
    }

    pub fn new(rho: ScalarField<T>, phi: ScalarField<T>, theta: ScalarField<T>) -> Result<Self, GridError> {
        if !rho.grid().same_as(phi.grid()) || !rho.grid().same_as(theta.grid()) {
            return Err(GridError::GridMismatch);
        }
        Ok(Self { rho, phi, theta })
    }

    /// Meridional field `b = v_ρ e_ρ + v_φ e_φ`.
    pub fn meridional(rho: ScalarField<T>, phi: ScalarField<T>) -> Self {
        let theta = ScalarField::zeros(rho.grid());
        Self { rho, phi, theta }
    }

    pub fn from_fn(grid: &Arc<MeridianGrid<T>>, f: impl Fn(T, T) -> [T; 3]) -> Self {
        let vals: Vec<[T; 3]> = grid.nodes().map(|(i, j)| f(grid.rho(i), grid.phi(j))).collect();
        let comp = |c: usize| ScalarField::from_vec(grid, vals.iter().map(|v| v[c]).collect()).unwrap();
        Self { rho: comp(0), phi: comp(1), theta: comp(2) }
    }

    pub fn grid(&self) -> &Arc<MeridianGrid<T>> {
        self.rho.grid()
    }

    pub fn components(&self) -> [&ScalarField<T>; 3] {
        [&self.rho, &self.phi, &self.theta]
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField<T>) -> ScalarField<T>) -> Self {
        Self { rho: f(&self.rho), phi: f(&self.phi), theta: f(&self.theta) }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&ScalarField<T>, &ScalarField<T>) -> ScalarField<T>) -> Self {
        Self {
            rho: f(&self.rho, &other.rho),
            phi: f(&self.phi, &other.phi),
            theta: f(&self.theta, &other.theta),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(b))
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub(b))
    }
    pub fn scale(&self, c: T) -> Self {
        self.map_components(|a| a.scale(c))
    }

    /// Node-wise `|v|²`.
    pub fn norm_sq(&self) -> ScalarField<T> {
        let g = self.grid();
        ScalarField::from_index_fn(g, |i, j| {
            let (a, b, c) = (self.rho.at(i, j), self.phi.at(i, j), self.theta.at(i, j));
            a * a + b * b + c * c
        })
    }

    /// Node-wise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField<T> {
        self.rho.mul(&other.rho).add(&self.phi.mul(&other.phi)).add(&self.theta.mul(&other.theta))
    }

    pub fn max_abs(&self) -> T {
        self.norm_sq().max_abs().sqrt()
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        self.rho.check_finite()?;
        self.phi.check_finite()?;
        self.theta.check_finite()
    }
}

/// The 3×3 matrix `(∇v)_{ab} = e_a · ∂_b v` in the spherical frame.
#[derive(Debug, Clone)]
pub struct GradientField<T> {
    pub entries: [[ScalarField<T>; 3]; 3],
}

impl<T: Real> GradientField<T> {
    pub fn entry(&self, a: usize, b: usize) -> &ScalarField<T> {
        &self.entries[a][b]
    }

    /// Node-wise Frobenius norm squared `|∇v|²`.
    pub fn frobenius_sq(&self) -> ScalarField<T> {
        let g = self.entries[0][0].grid();
        ScalarField::from_index_fn(g, |i, j| {
            let mut s = T::zero();
            for row in &self.entries {
                for e in row {
                    let x = e.at(i, j);
                    s = s + x * x;
                }
            }
            s
        })
    }

    /// Applies the matrix to a vector field node-wise.
    pub fn apply(&self, v: &VectorField<T>) -> VectorField<T> {
        let c = v.components();
        let row = |a: usize| {
            ScalarField::from_index_fn(v.grid(), |i, j| {
                (0..3).fold(T::zero(), |s, b| s + self.entries[a][b].at(i, j) * c[b].at(i, j))
            })
        };
        VectorField { rho: row(0), phi: row(1), theta: row(2) }
    }
}
