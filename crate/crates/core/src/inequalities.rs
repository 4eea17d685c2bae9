//! Weighted Poincaré constants and field-level checkers for the Poincaré,
//! Hardy and curl-gradient inequalities on `D_m`.

use crate::field::{ScalarField, VectorField};
use crate::linalg::{LinalgError, SymTridiagonal};
use crate::norms::{integrate, per_radius_mean, vector_grad_l2, vector_l2};
use crate::ops::{curl, d_phi, d_rho, divergence, eoo_project, grad_sq, laplacian_divfree, nhl_residuals};
use crate::real::Real;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("half-angle alpha = {alpha} outside {range}")]
    Alpha { alpha: f64, range: &'static str },
    #[error("eigenproblem needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error(transparent)]
    Eigen(#[from] LinalgError),
    #[error("hypothesis '{hypothesis}' fails (residual {residual:.3e} > {tolerance:.3e}); lhs = {lhs:.6e}, rhs = {rhs:.6e}")]
    Hypothesis {
        hypothesis: &'static str,
        residual: f64,
        tolerance: f64,
        lhs: f64,
        rhs: f64,
    },
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
}

/// Admissible class for the one-dimensional Poincaré inequality on `[π/2 − α, π/2 + α]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareSubspace {
    /// `∫ sin y · u dy = 0`.
    MeanZero,
    /// `u(a) = u(b) = 0`.
    Dirichlet,
}

/// Outcome of one inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(name: &str, alpha: f64, n: usize, lhs: f64, rhs: f64, constant: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        Self { name: name.into(), alpha, n, lhs, rhs, constant, slack, tolerance, pass: slack >= -tolerance }
    }
}

fn check_alpha<T: Real>(alpha: T, max: T, inclusive: bool, range: &'static str) -> Result<(), InequalityError> {
    let ok = alpha > T::zero() && if inclusive { alpha <= max } else { alpha < max };
    if ok {
        Ok(())
    } else {
        Err(InequalityError::Alpha { alpha: alpha.as_f64(), range })
    }
}

/// `C_{α,A} = 4α²/(π² + 2α²)` for mean-zero functions, `0 < α < π/2`.
pub fn poincare_const_a<T: Real>(alpha: T) -> Result<T, InequalityError> {
    check_alpha(alpha, T::FRAC_PI_2(), false, "(0, pi/2)")?;
    let a2 = alpha * alpha;
    Ok(T::lit(4.0) * a2 / (T::PI() * T::PI() + T::lit(2.0) * a2))
}

/// `C_{α,B} = 4α²/(π² − 2α²/cos²α)` for functions vanishing at both ends, `0 < α ≤ π/4`.
pub fn poincare_const_b<T: Real>(alpha: T) -> Result<T, InequalityError> {
    let limit = T::FRAC_PI_4() * (T::one() + T::lit(8.0) * T::epsilon());
    check_alpha(alpha, limit, true, "(0, pi/4]")?;
    let a2 = alpha * alpha;
    let c = alpha.cos();
    Ok(T::lit(4.0) * a2 / (T::PI() * T::PI() - T::lit(2.0) * a2 / (c * c)))
}

/// Sharp constant `1/λ` of `(p u′)′ + λ p u = 0` on `[a, b]` with `n` nodes.
///
/// Conservative three-point stiffness with `p` at midpoints and a lumped
/// trapezoid mass. `MeanZero` uses the natural (Neumann) problem and returns
/// its first nonzero eigenvalue, which is the minimum over the weighted
/// mean-zero subspace.
pub fn weighted_poincare_constant<T: Real>(
    a: T,
    b: T,
    n: usize,
    subspace: PoincareSubspace,
    p: impl Fn(T) -> T,
) -> Result<T, InequalityError> {
    if n < 16 {
        return Err(InequalityError::TooFewNodes(n));
    }
    let h = (b - a) / T::count(n - 1);
    let half = T::lit(0.5);
    let y = |k: usize| a + T::count(k) * h;
    let ph: Vec<T> = (0..n - 1).map(|k| p(y(k) + half * h) / h).collect();
    let (kd, ke, m, index) = match subspace {
        PoincareSubspace::Dirichlet => {
            let kd = (1..n - 1).map(|k| ph[k - 1] + ph[k]).collect::<Vec<_>>();
            let ke = (1..n - 2).map(|k| -ph[k]).collect::<Vec<_>>();
            let m = (1..n - 1).map(|k| p(y(k)) * h).collect::<Vec<_>>();
            (kd, ke, m, 0)
        }
        PoincareSubspace::MeanZero => {
            let kd = (0..n)
                .map(|k| {
                    let left = if k > 0 { ph[k - 1] } else { T::zero() };
                    let right = if k + 1 < n { ph[k] } else { T::zero() };
                    left + right
                })
                .collect::<Vec<_>>();
            let ke = (0..n - 1).map(|k| -ph[k]).collect::<Vec<_>>();
            let m = (0..n)
                .map(|k| {
                    let w = if k == 0 || k + 1 == n { half } else { T::one() };
                    w * p(y(k)) * h
                })
                .collect::<Vec<_>>();
            (kd, ke, m, 1)
        }
    };
    let lambda = SymTridiagonal::from_generalized(&kd, &ke, &m).eigenvalue(index)?;
    Ok(T::one() / lambda)
}

/// Sharp discrete constant for `p = sin y` on `[π/2 − α, π/2 + α]`.
pub fn sharp_weighted_constant<T: Real>(alpha: T, subspace: PoincareSubspace, n: usize) -> Result<T, InequalityError> {
    check_alpha(alpha, T::FRAC_PI_2(), false, "(0, pi/2)")?;
    let c = T::FRAC_PI_2();
    weighted_poincare_constant(c - alpha, c + alpha, n, subspace, |y| y.sin())
}

/// `∫f²/ρ² ≤ (4+ε)∫|∂ρf|² + (40+16/ε)∫f²`.
pub fn hardy_check<T: Real>(f: &ScalarField<T>, eps: T) -> Result<InequalityReport, InequalityError> {
    if !(eps > T::zero()) {
        return Err(InequalityError::Epsilon(eps.as_f64()));
    }
    let g = f.grid();
    let lhs = integrate(&f.map_indexed(|i, _, x| x * x / (g.rho(i) * g.rho(i))));
    let dr = d_rho(f);
    let four = T::lit(4.0);
    let rhs = (four + eps) * integrate(&dr.mul(&dr)) + (T::lit(40.0) + T::lit(16.0) / eps) * integrate(&f.mul(f));
    let tol = T::lit(1e-12) * (lhs.abs() + rhs.abs());
    Ok(InequalityReport::new(
        "hardy",
        g.domain().alpha().as_f64(),
        g.n_rho().max(g.n_phi()),
        lhs.as_f64(),
        rhs.as_f64(),
        (four + eps).as_f64(),
        tol.as_f64(),
    ))
}

/// Thresholds for the hypotheses of [`curl_grad_check`], relative to `‖∇u‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurlGradTolerances {
    /// `‖div u‖ ≤ div·h²·(‖∇u‖ + ‖Δu‖)` plus an absolute floor.
    pub div: f64,
    /// Boundary residuals `≤ nhl·h·scale`.
    pub nhl: f64,
    /// Discarded even-odd-odd part `≤ eoo·‖u‖`.
    pub eoo: f64,
    /// Allowed negative slack, `c·h·√3‖∇×u‖`.
    pub slack: f64,
}

impl Default for CurlGradTolerances {
    fn default() -> Self {
        Self { div: 50.0, nhl: 20.0, eoo: 1e-10, slack: 1.0 }
    }
}

/// `‖∇u‖ ≤ √3 ‖∇×u‖` for divergence-free, slip-compliant, even-odd-odd `u` on a cone with `α ≤ π/6`.
pub fn curl_grad_check<T: Real>(u: &VectorField<T>) -> Result<InequalityReport, InequalityError> {
    curl_grad_check_with(u, CurlGradTolerances::default())
}

pub fn curl_grad_check_with<T: Real>(
    u: &VectorField<T>,
    tol: CurlGradTolerances,
) -> Result<InequalityReport, InequalityError> {
    let g = u.grid();
    let alpha = g.domain().alpha().as_f64();
    let h = g.h().as_f64();
    let lhs = vector_grad_l2(u).as_f64();
    let rhs = 3f64.sqrt() * vector_l2(&curl(u)).as_f64();
    let unorm = vector_l2(u).as_f64();
    let fail = |hypothesis, residual: f64, tolerance: f64| InequalityError::Hypothesis {
        hypothesis,
        residual,
        tolerance,
        lhs,
        rhs,
    };

    let angle_max = std::f64::consts::FRAC_PI_6 * (1.0 + 64.0 * f64::EPSILON);
    if alpha > angle_max {
        return Err(fail("alpha <= pi/6", alpha, std::f64::consts::FRAC_PI_6));
    }
    let floor = 1e-12 * (lhs + unorm).max(f64::MIN_POSITIVE);
    let div = crate::norms::l2(&divergence(u)).as_f64();
    let second = vector_l2(&laplacian_divfree(u)).as_f64();
    let div_tol = tol.div * h * h * (lhs + second) + floor;
    if div > div_tol {
        return Err(fail("divergence-free", div, div_tol));
    }
    let scale = u.max_abs().as_f64() + lhs / integrate(&ScalarField::constant(g, T::one())).as_f64().sqrt();
    let nhl = nhl_residuals(u).max();
    let nhl_tol = tol.nhl * h * scale + floor;
    if nhl > nhl_tol {
        return Err(fail("NHL boundary condition", nhl, nhl_tol));
    }
    let (_, eoo) = eoo_project(u).map_err(|_| fail("symmetric grid", 1.0, 0.0))?;
    let eoo = eoo.as_f64();
    let eoo_tol = tol.eoo * unorm + floor;
    if eoo > eoo_tol {
        return Err(fail("even-odd-odd symmetry", eoo, eoo_tol));
    }
    Ok(InequalityReport::new(
        "curl_grad",
        alpha,
        g.n_rho().max(g.n_phi()),
        lhs,
        rhs,
        3f64.sqrt(),
        tol.slack * h * rhs + floor,
    ))
}

/// `∫u²/ρ² ≤ C ∫(∂φu/ρ)²`, applied slice by slice in φ.
pub fn poincare_field_check<T: Real>(u: &ScalarField<T>, mode: PoincareSubspace) -> Result<InequalityReport, InequalityError> {
    let g = u.grid();
    let alpha = g.domain().alpha();
    let scale = u.max_abs().as_f64();
    let (constant, name) = match mode {
        PoincareSubspace::Dirichlet => {
            let edge = (0..g.n_rho())
                .flat_map(|i| [u.at(i, 0), u.at(i, g.n_phi() - 1)])
                .fold(0.0f64, |m, x| m.max(x.abs().as_f64()));
            let tolerance = 1e-10 * scale;
            if edge > tolerance {
                return Err(InequalityError::Hypothesis { hypothesis: "zero on the walls", residual: edge, tolerance, lhs: 0.0, rhs: 0.0 });
            }
            (poincare_const_b(alpha)?, "poincare_dirichlet")
        }
        PoincareSubspace::MeanZero => {
            let mass = per_radius_mean(&u.map(|x| x.abs()));
            let worst = per_radius_mean(u)
                .iter()
                .zip(&mass)
                .fold(0.0f64, |m, (&x, &w)| m.max((x.abs() / w.max(T::min_positive_value())).as_f64()));
            let tolerance = 1e-8;
            if worst > tolerance && scale > 0.0 {
                return Err(InequalityError::Hypothesis { hypothesis: "weighted mean zero on every sphere", residual: worst, tolerance, lhs: 0.0, rhs: 0.0 });
            }
            (poincare_const_a(alpha)?, "poincare_mean_zero")
        }
    };
    let lhs = integrate(&u.map_indexed(|i, _, x| x * x / (g.rho(i) * g.rho(i))));
    let dp = d_phi(u);
    let rhs = constant * integrate(&dp.map_indexed(|i, _, x| x * x / (g.rho(i) * g.rho(i))));
    let h = g.h_phi();
    let tol = T::lit(10.0) * h * h * rhs.abs();
    Ok(InequalityReport::new(
        name,
        alpha.as_f64(),
        g.n_phi(),
        lhs.as_f64(),
        rhs.as_f64(),
        constant.as_f64(),
        tol.as_f64(),
    ))
}

/// `(‖v_ρ‖_{H¹} + ‖v_φ‖_{H¹} + ‖v_θ‖_{H¹}) / ‖v‖_{H¹}`.
pub fn h1_equivalence_ratio<T: Real>(v: &VectorField<T>) -> T {
    let comp = |f: &ScalarField<T>| (integrate(&f.mul(f)) + integrate(&grad_sq(f))).sqrt();
    let sum = comp(&v.rho) + comp(&v.phi) + comp(&v.theta);
    let whole = (vector_l2(v).powi(2) + vector_grad_l2(v).powi(2)).sqrt();
    sum / whole
}

/// Constant `C` with `1/C ≤ ratio ≤ C`, obtained from the Hardy bound with `ε = 1`
/// and `|cot φ| ≤ tan α` on the cone.
pub fn h1_equivalence_bound<T: Real>(alpha: T) -> T {
    let t2 = alpha.tan().powi(2);
    let upper = T::lit(339.0).sqrt();
    let lower = (T::lit(225.0) + T::lit(112.0) * t2).sqrt();
    upper.max(lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_constants() {
        assert!((poincare_const_a(PI / 6.0).unwrap() - 2.0 / 19.0).abs() < 1e-15);
        assert!((poincare_const_a(PI / 4.0).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((poincare_const_b(PI / 6.0).unwrap() - 3.0 / 25.0).abs() < 1e-15);
        assert!((poincare_const_b(PI / 4.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(poincare_const_b(1e-6f64).unwrap() < 1e-12);
        assert!(poincare_const_b(PI / 3.0).is_err());
        assert!(poincare_const_a(PI / 2.0).is_err());
    }

    #[test]
    fn unweighted_dirichlet_limit() {
        let a = PI / 6.0;
        let c = weighted_poincare_constant(0.0, 2.0 * a, 513, PoincareSubspace::Dirichlet, |_| 1.0).unwrap();
        let want = (2.0 * a / PI).powi(2);
        assert!((c - want).abs() / want < 1e-5);
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(sharp_weighted_constant(0.5, PoincareSubspace::Dirichlet, 8), Err(InequalityError::TooFewNodes(8))));
    }
}
