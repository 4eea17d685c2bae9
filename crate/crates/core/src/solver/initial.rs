//! Example initial data built from a stream-function pattern, and the admissibility report.

use crate::field::{ScalarField, VectorField};
use crate::grid::MeridianGrid;
use crate::norms::vector_l2;
use crate::ops::{divergence, eoo_project, nhl_residuals, NhlResiduals};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

/// Parameters of the divergence-free, slip-compliant, even-odd-odd family
///
/// `v_ρ = λ₁ f_m g′/(ρ² sinφ)`, `v_φ = −λ₁ f_m′ g/(ρ sinφ)`,
/// `v_θ = λ₂ H_m(ρ) sin((2q+1)π s/(2α))/(ρ sinφ)` with `s = φ − π/2`,
/// `g = sin³(ℓπ s/α)`, `f_m = ρ⁴(ρ − 1/m)³(ρ − 1)³` and `H_m = ∫₀^ρ s²(s − 1/m)(s − 1) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamData {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `ℓ ≥ 1`.
    pub meridional_mode: u32,
    /// `q ≥ 0`.
    pub swirl_mode: u32,
}

impl StreamData {
    pub fn example(lambda1: f64, lambda2: f64) -> Self {
        Self { lambda1, lambda2, meridional_mode: 1, swirl_mode: 0 }
    }
}

/// `f_m` and `f_m′`.
pub fn f_m(rho: f64, m: f64) -> (f64, f64) {
    let (a, b) = (rho - 1.0 / m, rho - 1.0);
    let w = a.powi(3) * b.powi(3);
    let dw = 3.0 * a * a * b * b * (a + b);
    (rho.powi(4) * w, 4.0 * rho.powi(3) * w + rho.powi(4) * dw)
}

/// `H_m(ρ) = ρ⁵/5 − (1 + 1/m)ρ⁴/4 + ρ³/(3m)`.
pub fn h_m_integral(rho: f64, m: f64) -> f64 {
    rho.powi(5) / 5.0 - (1.0 + 1.0 / m) * rho.powi(4) / 4.0 + rho.powi(3) / (3.0 * m)
}

/// Velocity of the family on `grid`.
pub fn stream_velocity(grid: &Arc<MeridianGrid<f64>>, d: StreamData) -> VectorField<f64> {
    let alpha = grid.domain().alpha();
    let m = grid.domain().m() as f64;
    let k = d.meridional_mode as f64 * std::f64::consts::PI / alpha;
    let q = (2 * d.swirl_mode + 1) as f64 * FRAC_PI_2 / alpha;
    VectorField::from_fn(grid, |r, p| {
        let s = p - FRAC_PI_2;
        let (sn, cs) = (k * s).sin_cos();
        let (g, dg) = (sn.powi(3), 3.0 * k * sn * sn * cs);
        let (f, df) = f_m(r, m);
        let sp = p.sin();
        [
            d.lambda1 * f * dg / (r * r * sp),
            -d.lambda1 * df * g / (r * sp),
            d.lambda2 * h_m_integral(r, m) * (q * s).sin() / (r * sp),
        ]
    })
}

/// The example data with `ℓ = 1`, `q = 0`.
pub fn example_initial_data(lambda1: f64, lambda2: f64, grid: &Arc<MeridianGrid<f64>>) -> VectorField<f64> {
    stream_velocity(grid, StreamData::example(lambda1, lambda2))
}

/// `λ₂` for which `sup|Γ₀| = target` over the grid nodes.
pub fn lambda2_for_gamma_sup(target: f64, grid: &Arc<MeridianGrid<f64>>) -> f64 {
    let unit = example_initial_data(0.0, 1.0, grid);
    let sup = grid.nodes().fold(0.0f64, |mx, (i, j)| mx.max((grid.rho(i) * grid.sin(j) * unit.theta.at(i, j)).abs()));
    target / sup
}

/// `v = (c/(ρ sinφ)) e_θ`.
pub fn swirl_velocity(grid: &Arc<MeridianGrid<f64>>, c: f64) -> VectorField<f64> {
    VectorField::from_fn(grid, |r, p| [0.0, 0.0, c / (r * p.sin())])
}

/// Threshold on `sup|Γ₀|` under which the global result applies.
pub const GAMMA_THRESHOLD_REGULARITY: f64 = 1.0 / 100.0;
/// Threshold on `sup|Γ₀|` under which the K/F/Ω energy estimate applies.
pub const GAMMA_THRESHOLD_KFO: f64 = 1.0 / 95.0;

#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub div_l2: f64,
    pub div_relative: f64,
    pub nhl: NhlResiduals,
    pub nhl_relative: f64,
    pub eoo_residual: f64,
    pub eoo_relative: f64,
    pub gamma_sup: f64,
    pub below_regularity_threshold: bool,
    pub below_kfo_threshold: bool,
    /// `div`, NHL and symmetry residuals each below `c·h²` relative to the field size.
    pub divergence_free: bool,
    pub nhl_ok: bool,
    pub eoo_ok: bool,
}

/// Residual report for initial data; `c` scales the `h²` acceptance level.
pub fn admissibility_check(v: &VectorField<f64>, c: f64) -> Admissibility {
    let g = v.grid();
    let h2 = g.h() * g.h();
    let scale = vector_l2(v).max(v.max_abs());
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let div_l2 = crate::norms::l2(&divergence(v));
    let nhl = nhl_residuals(v);
    let (eoo_residual, eoo_ok) = match eoo_project(v) {
        Ok((_, r)) => (r, rel(r) <= 1e-10),
        Err(_) => (f64::NAN, false),
    };
    let gamma = ScalarField::from_index_fn(g, |i, j| g.rho(i) * g.sin(j) * v.theta.at(i, j));
    let gamma_sup = gamma.max_abs();
    // Derivatives of the data can be large compared with its size, so the
    // residual levels are measured against c·h²·(1 + derivative scale).
    let deriv = crate::norms::vector_grad_l2(v) / scale.max(f64::MIN_POSITIVE);
    let level = c * h2 * (1.0 + deriv * deriv);
    Admissibility {
        div_l2,
        div_relative: rel(div_l2),
        nhl,
        nhl_relative: rel(nhl.max()),
        eoo_residual,
        eoo_relative: rel(eoo_residual),
        gamma_sup,
        below_regularity_threshold: gamma_sup <= GAMMA_THRESHOLD_REGULARITY,
        below_kfo_threshold: gamma_sup <= GAMMA_THRESHOLD_KFO,
        divergence_free: rel(div_l2) <= level,
        nhl_ok: rel(nhl.max()) <= level * 10.0,
        eoo_ok,
    }
}
