//! Coordinates, domains and boundary classification.
//!
//! Angles follow the spherical convention: `phi` is measured from the positive
//! x₃-axis, so the meridian domain is `phi ∈ [π/2 − α, π/2 + α]`.

use crate::real::Real;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("half-angle alpha = {0} outside the admissible range {1}")]
    BadAlpha(f64, &'static str),
    #[error("inner-radius index m = {0} must be at least 2")]
    BadIndex(u32),
    #[error("negative cylindrical radius r = {0}")]
    NegativeRadius(f64),
    #[error("point (rho = {rho}, phi = {phi}) lies outside the closed meridian rectangle")]
    OutsideDomain { rho: f64, phi: f64 },
    #[error("cusp exponent beta = {0} must exceed 1")]
    BadBeta(f64),
    #[error("slab index j = {j} outside 1..={depth}")]
    SlabOutOfRange { j: u32, depth: u32 },
}

/// Truncated cone sector `D_m`: `1/m < ρ < 1`, `|φ − π/2| ≤ α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridianDomain<T> {
    alpha: T,
    m: u32,
}

impl<T: Real> MeridianDomain<T> {
    /// Construction-level check: `0 < α < π/2`, `m ≥ 2`.
    pub fn new(alpha: T, m: u32) -> Result<Self, GeometryError> {
        if !(alpha > T::zero() && alpha < T::FRAC_PI_2()) {
            return Err(GeometryError::BadAlpha(alpha.as_f64(), "(0, pi/2)"));
        }
        if m < 2 {
            return Err(GeometryError::BadIndex(m));
        }
        Ok(Self { alpha, m })
    }

    /// Stricter check used by the solver: `0 < α ≤ π/6`.
    pub fn for_solver(alpha: T, m: u32) -> Result<Self, GeometryError> {
        let d = Self::new(alpha, m)?;
        d.check_solver_angle()?;
        Ok(d)
    }

    pub fn check_solver_angle(&self) -> Result<(), GeometryError> {
        let limit = T::PI() / T::lit(6.0) * (T::one() + T::lit(64.0) * T::epsilon());
        if self.alpha > limit {
            return Err(GeometryError::BadAlpha(self.alpha.as_f64(), "(0, pi/6]"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn rho_min(&self) -> T {
        T::one() / T::count(self.m as usize)
    }
    pub fn rho_max(&self) -> T {
        T::one()
    }
    pub fn phi_min(&self) -> T {
        T::FRAC_PI_2() - self.alpha
    }
    pub fn phi_max(&self) -> T {
        T::FRAC_PI_2() + self.alpha
    }

    /// Volume of `D_m`, `2π (1 − m⁻³)/3 · 2 sin α`.
    pub fn volume(&self) -> T {
        let a = self.rho_min();
        let two = T::lit(2.0);
        two * T::PI() * (T::one() - a * a * a) / T::lit(3.0) * two * self.alpha.sin()
    }
}

/// Cusp region built from dyadic slabs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspDomain<T> {
    beta: T,
    depth: u32,
}

impl<T: Real> CuspDomain<T> {
    pub fn new(beta: T, depth: u32) -> Result<Self, GeometryError> {
        if !(beta > T::one()) {
            return Err(GeometryError::BadBeta(beta.as_f64()));
        }
        Ok(Self { beta, depth })
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn depth(&self) -> u32 {
        self.depth
    }
}

/// Extents of one cusp slab: `r ∈ [r_lo, r_hi)`, `x₃ ∈ (0, x3_hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab<T> {
    pub r_lo: T,
    pub r_hi: T,
    pub x3_hi: T,
}

/// Returns slab `S_j`, `1 ≤ j ≤ depth`.
pub fn cusp_slab<T: Real>(j: u32, domain: &CuspDomain<T>) -> Result<Slab<T>, GeometryError> {
    if j == 0 || j > domain.depth {
        return Err(GeometryError::SlabOutOfRange { j, depth: domain.depth });
    }
    let two = T::lit(2.0);
    let jj = T::count(j as usize);
    Ok(Slab {
        r_lo: two.powf(-jj),
        r_hi: two.powf(-(jj - T::one())),
        x3_hi: two.powf(-domain.beta * (jj - T::one())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylindrical<T> {
    pub r: T,
    pub theta: T,
    pub x3: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical<T> {
    pub rho: T,
    pub phi: T,
    pub theta: T,
}

pub fn to_spherical<T: Real>(p: Cylindrical<T>) -> Result<Spherical<T>, GeometryError> {
    if p.r < T::zero() {
        return Err(GeometryError::NegativeRadius(p.r.as_f64()));
    }
    Ok(Spherical {
        rho: p.r.hypot(p.x3),
        phi: p.r.atan2(p.x3),
        theta: p.theta,
    })
}

pub fn to_cylindrical<T: Real>(p: Spherical<T>) -> Cylindrical<T> {
    Cylindrical {
        r: p.rho * p.phi.sin(),
        theta: p.theta,
        x3: p.rho * p.phi.cos(),
    }
}

/// Cartesian components of `(e_ρ, e_φ, e_θ)`.
pub fn spherical_basis<T: Real>(phi: T, theta: T) -> [[T; 3]; 3] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [
        [sp * ct, sp * st, cp],
        [cp * ct, cp * st, -sp],
        [-st, ct, T::zero()],
    ]
}

/// Node classification on the closed meridian rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BoundaryLabel {
    /// Lower wall `φ = φ₁`.
    R1,
    /// Upper wall `φ = φ₂`.
    R2,
    /// Inner sphere `ρ = 1/m`.
    A1,
    /// Outer sphere `ρ = 1`.
    A2,
    Interior,
    Corner,
}

/// Four edges of the meridian rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    R1,
    R2,
    A1,
    A2,
}

impl BoundaryLabel {
    pub fn is_boundary(self) -> bool {
        !matches!(self, BoundaryLabel::Interior)
    }
}

/// Classifies `(ρ, φ)` with a relative snapping tolerance of a few ulps.
pub fn classify_boundary<T: Real>(
    rho: T,
    phi: T,
    domain: &MeridianDomain<T>,
) -> Result<BoundaryLabel, GeometryError> {
    let tol = T::lit(64.0) * T::epsilon();
    let (r0, r1) = (domain.rho_min(), domain.rho_max());
    let (p0, p1) = (domain.phi_min(), domain.phi_max());
    let outside = rho < r0 - tol || rho > r1 + tol || phi < p0 - tol || phi > p1 + tol;
    if outside || !rho.is_finite() || !phi.is_finite() {
        return Err(GeometryError::OutsideDomain { rho: rho.as_f64(), phi: phi.as_f64() });
    }
    let on_a1 = (rho - r0).abs() <= tol;
    let on_a2 = (rho - r1).abs() <= tol;
    let on_r1 = (phi - p0).abs() <= tol;
    let on_r2 = (phi - p1).abs() <= tol;
    let label = match (on_a1 || on_a2, on_r1 || on_r2) {
        (true, true) => BoundaryLabel::Corner,
        (true, false) if on_a1 => BoundaryLabel::A1,
        (true, false) => BoundaryLabel::A2,
        (false, true) if on_r1 => BoundaryLabel::R1,
        (false, true) => BoundaryLabel::R2,
        (false, false) => BoundaryLabel::Interior,
    };
    Ok(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spherical_examples() {
        let s = to_spherical(Cylindrical { r: 1.0f64, theta: 0.0, x3: 0.0 }).unwrap();
        assert!((s.rho - 1.0).abs() < 1e-15 && (s.phi - PI / 2.0).abs() < 1e-15);
        let s = to_spherical(Cylindrical { r: 3f64.sqrt() / 2.0, theta: 0.0, x3: 0.5 }).unwrap();
        assert!((s.rho - 1.0).abs() < 1e-15 && (s.phi - PI / 3.0).abs() < 1e-15);
        assert!(to_spherical(Cylindrical { r: -0.1, theta: 0.0, x3: 0.0 }).is_err());
    }

    #[test]
    fn basis_at_equator() {
        let b = spherical_basis(PI / 2.0, 0.0);
        let want = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];
        for a in 0..3 {
            for c in 0..3 {
                assert!((b[a][c] - want[a][c]).abs() < 1e-15);
            }
        }
        assert!((spherical_basis(PI / 3.0, 0.0)[0][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn labels() {
        let d = MeridianDomain::new(PI / 6.0, 2).unwrap();
        assert_eq!(classify_boundary(0.5, PI / 2.0, &d).unwrap(), BoundaryLabel::A1);
        assert_eq!(classify_boundary(0.7, d.phi_max(), &d).unwrap(), BoundaryLabel::R2);
        assert_eq!(classify_boundary(1.0, d.phi_min(), &d).unwrap(), BoundaryLabel::Corner);
        assert!(classify_boundary(0.4, PI / 2.0, &d).is_err());
    }

    #[test]
    fn slabs() {
        let c = CuspDomain::new(3.0, 5).unwrap();
        let s = cusp_slab(1, &c).unwrap();
        assert_eq!((s.r_lo, s.r_hi, s.x3_hi), (0.5, 1.0, 1.0));
        assert_eq!(cusp_slab(3, &c).unwrap().x3_hi, 1.0 / 64.0);
        assert!(cusp_slab(6, &c).is_err());
        let measure: f64 = (1..=5).map(|j| cusp_slab(j, &c).unwrap()).map(|s| s.r_hi - s.r_lo).sum();
        assert!((measure - (1.0 - 2f64.powi(-5))).abs() < 1e-15);
    }

    #[test]
    fn solver_angle_guard() {
        assert!(MeridianDomain::for_solver(PI / 6.0, 2).is_ok());
        assert!(MeridianDomain::for_solver(PI / 4.0, 2).is_err());
        assert!(MeridianDomain::new(PI / 4.0, 2).is_ok());
        assert!(MeridianDomain::new(0.3, 1).is_err());
    }
}
