//! Uniform tensor grid on the meridian rectangle `[1/m, 1] × [φ₁, φ₂]`.

use crate::geometry::{BoundaryLabel, MeridianDomain};
use crate::real::Real;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 3 nodes per direction, got {n_rho} x {n_phi}")]
    TooSmall { n_rho: usize, n_phi: usize },
    #[error("grid is not symmetric about phi = pi/2 (n_phi = {0} must be odd)")]
    NotSymmetric(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },
}

/// Node `(i, j)` sits at `(ρ_i, φ_j)`; storage is φ-major: `k = j·n_rho + i`.
#[derive(Debug, Clone)]
pub struct MeridianGrid<T> {
    domain: MeridianDomain<T>,
    n_rho: usize,
    n_phi: usize,
    h_rho: T,
    h_phi: T,
    rho: Vec<T>,
    phi: Vec<T>,
    sin: Vec<T>,
    cos: Vec<T>,
}

impl<T: Real> MeridianGrid<T> {
    pub fn new(domain: MeridianDomain<T>, n_rho: usize, n_phi: usize) -> Result<Self, GridError> {
        if n_rho < 3 || n_phi < 3 {
            return Err(GridError::TooSmall { n_rho, n_phi });
        }
        let (r0, r1) = (domain.rho_min(), domain.rho_max());
        let h_rho = (r1 - r0) / T::count(n_rho - 1);
        let mut rho: Vec<T> = (0..n_rho).map(|i| r0 + T::count(i) * h_rho).collect();
        rho[n_rho - 1] = r1;

        // Offsets from the equator; mirrored exactly when n_phi is odd.
        let alpha = domain.alpha();
        let h_phi = T::lit(2.0) * alpha / T::count(n_phi - 1);
        let mut s: Vec<T> = (0..n_phi).map(|j| -alpha + T::count(j) * h_phi).collect();
        s[0] = -alpha;
        s[n_phi - 1] = alpha;
        if n_phi % 2 == 1 {
            let mid = n_phi / 2;
            s[mid] = T::zero();
            for k in 1..=mid {
                s[mid + k] = -s[mid - k];
            }
        }
        let phi = s.iter().map(|&x| T::FRAC_PI_2() + x).collect();
        let sin = s.iter().map(|&x| x.cos()).collect();
        let cos = s.iter().map(|&x| -x.sin()).collect();
        Ok(Self { domain, n_rho, n_phi, h_rho, h_phi, rho, phi, sin, cos })
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn domain(&self) -> &MeridianDomain<T> {
        &self.domain
    }
    pub fn n_rho(&self) -> usize {
        self.n_rho
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn len(&self) -> usize {
        self.n_rho * self.n_phi
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn h_rho(&self) -> T {
        self.h_rho
    }
    pub fn h_phi(&self) -> T {
        self.h_phi
    }
    /// Largest spacing, used for truncation-error scales.
    pub fn h(&self) -> T {
        self.h_rho.max(self.h_phi)
    }
    pub fn rho(&self, i: usize) -> T {
        self.rho[i]
    }
    pub fn phi(&self, j: usize) -> T {
        self.phi[j]
    }
    pub fn sin(&self, j: usize) -> T {
        self.sin[j]
    }
    pub fn cos(&self, j: usize) -> T {
        self.cos[j]
    }
    pub fn cot(&self, j: usize) -> T {
        self.cos[j] / self.sin[j]
    }
    pub fn rhos(&self) -> &[T] {
        &self.rho
    }
    pub fn phis(&self) -> &[T] {
        &self.phi
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n_rho + i
    }

    /// Index of the mirror node under `φ ↦ π − φ`.
    #[inline]
    pub fn mirror(&self, i: usize, j: usize) -> usize {
        self.idx(i, self.n_phi - 1 - j)
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_phi % 2 == 1
    }

    pub fn require_symmetric(&self) -> Result<(), GridError> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(GridError::NotSymmetric(self.n_phi))
        }
    }

    pub fn label(&self, i: usize, j: usize) -> BoundaryLabel {
        let on_a = i == 0 || i + 1 == self.n_rho;
        let on_r = j == 0 || j + 1 == self.n_phi;
        match (on_a, on_r) {
            (true, true) => BoundaryLabel::Corner,
            (true, false) if i == 0 => BoundaryLabel::A1,
            (true, false) => BoundaryLabel::A2,
            (false, true) if j == 0 => BoundaryLabel::R1,
            (false, true) => BoundaryLabel::R2,
            (false, false) => BoundaryLabel::Interior,
        }
    }

    /// Iterates `(i, j)` in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_phi).flat_map(move |j| (0..self.n_rho).map(move |i| (i, j)))
    }

    /// One-dimensional trapezoid weights in ρ (without the ρ² factor).
    pub fn trap_rho(&self, i: usize) -> T {
        if i == 0 || i + 1 == self.n_rho {
            self.h_rho / T::lit(2.0)
        } else {
            self.h_rho
        }
    }

    /// One-dimensional trapezoid weights in φ (without the sin φ factor).
    pub fn trap_phi(&self, j: usize) -> T {
        if j == 0 || j + 1 == self.n_phi {
            self.h_phi / T::lit(2.0)
        } else {
            self.h_phi
        }
    }

    /// Volume weight `2π ρ² sin φ` times the trapezoid weights.
    pub fn weight(&self, i: usize, j: usize) -> T {
        T::lit(2.0) * T::PI() * self.rho[i] * self.rho[i] * self.sin[j] * self.trap_rho(i) * self.trap_phi(j)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.n_rho == other.n_rho
                && self.n_phi == other.n_phi
                && self.domain == other.domain)
    }
}
