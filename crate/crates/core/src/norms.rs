//! Weighted quadrature over `D_m` with volume element `2π ρ² sin φ dρ dφ`.

use crate::field::{ScalarField, VectorField};
use crate::ops::{grad_sq, grad_vector};
use crate::real::Real;
use serde::Serialize;

/// `∫_{D_m} f dx` by the tensor trapezoid rule.
pub fn integrate<T: Real>(f: &ScalarField<T>) -> T {
    let g = f.grid();
    g.nodes().zip(f.data()).map(|((i, j), &x)| g.weight(i, j) * x).sum()
}

/// Weighted inner product `∫ f g dx`.
pub fn inner<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> T {
    integrate(&a.mul(b))
}

pub fn l2<T: Real>(f: &ScalarField<T>) -> T {
    integrate(&f.mul(f)).sqrt()
}

pub fn l6<T: Real>(f: &ScalarField<T>) -> T {
    integrate(&f.map(|x| x.powi(6))).powf(T::lit(1.0 / 6.0))
}

pub fn linf<T: Real>(f: &ScalarField<T>) -> T {
    f.max_abs()
}

/// `(‖f‖² + ‖∇f‖²)^{1/2}`.
pub fn h1<T: Real>(f: &ScalarField<T>) -> T {
    (integrate(&f.mul(f)) + integrate(&grad_sq(f))).sqrt()
}

/// `‖∇f‖_{L²}`.
pub fn grad_l2<T: Real>(f: &ScalarField<T>) -> T {
    integrate(&grad_sq(f)).sqrt()
}

pub fn vector_l2<T: Real>(v: &VectorField<T>) -> T {
    integrate(&v.norm_sq()).sqrt()
}

/// `‖∇v‖_{L²}` with the full spherical gradient matrix.
pub fn vector_grad_l2<T: Real>(v: &VectorField<T>) -> T {
    integrate(&grad_vector(v).frobenius_sq()).sqrt()
}

pub fn vector_h1<T: Real>(v: &VectorField<T>) -> T {
    (integrate(&v.norm_sq()) + integrate(&grad_vector(v).frobenius_sq())).sqrt()
}

/// The four norms of a scalar field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub l6: f64,
    pub linf: f64,
}

pub fn weighted_norms<T: Real>(f: &ScalarField<T>) -> Norms {
    Norms { l2: l2(f).as_f64(), h1: h1(f).as_f64(), l6: l6(f).as_f64(), linf: linf(f).as_f64() }
}

pub fn weighted_vector_norms<T: Real>(v: &VectorField<T>) -> Norms {
    let mag = v.norm_sq().map(|x| x.sqrt());
    Norms {
        l2: vector_l2(v).as_f64(),
        h1: vector_h1(v).as_f64(),
        l6: l6(&mag).as_f64(),
        linf: v.max_abs().as_f64(),
    }
}

/// `∫_{φ₁}^{φ₂} u(ρ_i, φ) sin φ dφ` for every radius, trapezoid in φ.
pub fn per_radius_mean<T: Real>(u: &ScalarField<T>) -> Vec<T> {
    let g = u.grid();
    (0..g.n_rho())
        .map(|i| (0..g.n_phi()).map(|j| g.trap_phi(j) * g.sin(j) * u.at(i, j)).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MeridianDomain;
    use crate::grid::MeridianGrid;
    use std::f64::consts::PI;

    #[test]
    fn unit_field_volume() {
        let exact = 7.0 * PI / 12.0;
        let mut errs = vec![];
        for n in [17, 33, 65] {
            let g = MeridianGrid::new(MeridianDomain::new(PI / 6.0, 2).unwrap(), n, n).unwrap().shared();
            let one = ScalarField::constant(&g, 1.0);
            errs.push((l2(&one).powi(2) - exact).abs());
            let two = ScalarField::constant(&g, 2.0);
            let vol = integrate(&one);
            assert!((l6(&two) - 2.0 * vol.powf(1.0 / 6.0)).abs() < 1e-13);
        }
        assert!(errs[0] / errs[1] > 3.8 && errs[1] / errs[2] > 3.8, "{errs:?}");
    }

    #[test]
    fn odd_mean_vanishes() {
        let g = MeridianGrid::new(MeridianDomain::new(PI / 6.0, 2).unwrap(), 9, 21).unwrap().shared();
        let u = ScalarField::from_fn(&g, |r, p| r * (p - PI / 2.0).sin().powi(3));
        for m in per_radius_mean(&u) {
            assert!(m.abs() < 1e-15);
        }
    }
}
