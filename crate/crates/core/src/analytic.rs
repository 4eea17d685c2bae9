//! Exact solutions used as regression oracles: the stationary swirl on the
//! cone sector and the forced blow-up on the dyadic cusp region.

use crate::elliptic::recover_pressure;
use crate::field::{ScalarField, VectorField};
use crate::geometry::{cusp_slab, CuspDomain, GeometryError, Slab};
use crate::norms::{integrate, l2, vector_l2};
use crate::ops::{convect_vector, curl, divergence, grad_scalar, laplacian_divfree, nhl_residuals};
use crate::{Grid, Scalar, Vector};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("energy bounds need beta > 2, got {0}")]
    Beta(f64),
    #[error("slab grids need at least 5 nodes per direction, got {0}")]
    Resolution(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Smooth ramp with `η = 0` on `[0, start]` and `η = 1` on `[end, ∞)`,
/// `η = ψ(t − start)/(ψ(t − start) + ψ(end − t))` with `ψ(s) = e^{−1/s}` for `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaProfile {
    pub start: f64,
    pub end: f64,
}

impl Default for EtaProfile {
    fn default() -> Self {
        Self { start: 1.0, end: 2.0 }
    }
}

fn psi(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0)
    } else {
        let p = (-1.0 / s).exp();
        (p, p / (s * s))
    }
}

impl EtaProfile {
    pub fn value(&self, t: f64) -> f64 {
        let w = self.end - self.start;
        let (a, _) = psi((t - self.start) / w);
        let (b, _) = psi((self.end - t) / w);
        if a + b == 0.0 {
            return 0.0;
        }
        a / (a + b)
    }

    /// Exact `η′`.
    pub fn derivative(&self, t: f64) -> f64 {
        let w = self.end - self.start;
        let (a, da) = psi((t - self.start) / w);
        let (b, db) = psi((self.end - t) / w);
        let s = a + b;
        if s == 0.0 {
            return 0.0;
        }
        (da * b + a * db) / (s * s * w)
    }
}

/// `v = (ρ sinφ)⁻¹ e_θ` and `P = −1/(2ρ² sin²φ)` on the grid.
pub fn stationary_swirl(grid: &Arc<Grid>) -> (Vector, Scalar) {
    let v = VectorField::from_fn(grid, |r, p| [0.0, 0.0, 1.0 / (r * p.sin())]);
    let pr = ScalarField::from_fn(grid, |r, p| -0.5 / (r * r * p.sin() * p.sin()));
    (v, pr)
}

/// Residuals of the stationary swirl, all expected to be `O(h²)`.
#[derive(Debug, Clone, Serialize)]
pub struct SwirlResiduals {
    pub h: f64,
    pub divergence: f64,
    pub curl: f64,
    pub nhl: f64,
    /// `‖Δv − (v·∇)v − ∇P‖` with the closed-form pressure, relative to `‖(v·∇)v‖`.
    pub momentum: f64,
    /// Recovered pressure against the closed form, both with zero mean.
    pub pressure: f64,
}

pub fn swirl_residuals(grid: &Arc<Grid>) -> SwirlResiduals {
    let (v, p) = stationary_swirl(grid);
    let (pr, pp) = grad_scalar(&p);
    let conv = convect_vector(&v);
    let gp = VectorField::meridional(pr, pp);
    let res = laplacian_divfree(&v).sub(&conv).sub(&gp);
    let scale = vector_l2(&v);
    let zero = VectorField::zeros(grid);
    let rec = recover_pressure(&v, &zero).p;
    let mean = integrate(&p) / integrate(&ScalarField::constant(grid, 1.0));
    let exact = p.map(|x| x - mean);
    SwirlResiduals {
        h: grid.h(),
        divergence: l2(&divergence(&v)) / scale,
        curl: vector_l2(&curl(&v)) / scale,
        nhl: nhl_residuals(&v).max() / v.max_abs(),
        momentum: vector_l2(&res) / vector_l2(&conv),
        pressure: l2(&rec.sub(&exact)) / l2(&exact),
    }
}

/// Uniform `(r, x₃)` grid on one slab, `n` nodes per direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlabGrid {
    pub j: u32,
    pub r_lo: f64,
    pub r_hi: f64,
    pub x3_hi: f64,
    pub n: usize,
}

impl SlabGrid {
    pub fn new(domain: &CuspDomain<f64>, j: u32, n: usize) -> Result<Self, AnalyticError> {
        if n < 5 {
            return Err(AnalyticError::Resolution(n));
        }
        let Slab { r_lo, r_hi, x3_hi } = cusp_slab(j, domain)?;
        Ok(Self { j, r_lo, r_hi, x3_hi, n })
    }

    pub fn hr(&self) -> f64 {
        (self.r_hi - self.r_lo) / (self.n - 1) as f64
    }

    pub fn h3(&self) -> f64 {
        self.x3_hi / (self.n - 1) as f64
    }

    pub fn r(&self, k: usize) -> f64 {
        self.r_lo + k as f64 * self.hr()
    }
}

/// Fields of the cusp solution on one slab, stored `x₃`-major.
#[derive(Debug, Clone)]
pub struct SlabSolution {
    pub grid: SlabGrid,
    pub v_theta: Vec<f64>,
    pub pressure: Vec<f64>,
    /// θ-component of the forcing.
    pub forcing: Vec<f64>,
}

/// `v = (η(t)/r) e_θ`, `P = −η²/(2r²)`, forcing `−(η′(t)/r) e_θ` on slab `S_j`.
pub fn cusp_blowup(grid: SlabGrid, eta: &EtaProfile, t: f64) -> SlabSolution {
    let (e, de) = (eta.value(t), eta.derivative(t));
    let n = grid.n;
    let mut v = Vec::with_capacity(n * n);
    let mut p = Vec::with_capacity(n * n);
    let mut f = Vec::with_capacity(n * n);
    for _ in 0..n {
        for k in 0..n {
            let r = grid.r(k);
            v.push(e / r);
            p.push(-e * e / (2.0 * r * r));
            f.push(-de / r);
        }
    }
    SlabSolution { grid, v_theta: v, pressure: p, forcing: f }
}

/// Largest residuals of the forced system over interior slab nodes, relative to the size of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlabResidual {
    pub j: u32,
    pub h: f64,
    /// `(Δ − 1/r²)v_θ − ∂ₜv_θ − forcing_θ`.
    pub swirl: f64,
    /// `v_θ²/r − ∂_r P`.
    pub radial: f64,
    /// `∂₃P`.
    pub vertical: f64,
    /// `max(|ω_r|, |ω₃|) = max(|∂₃v_θ|, |r⁻¹∂_r(r v_θ)|)`; the slip conditions need both to vanish.
    pub vorticity: f64,
}

/// Central-difference residuals; `∂ₜv_θ = η′/r` is exact.
pub fn slab_residual(sol: &SlabSolution, eta: &EtaProfile, t: f64) -> SlabResidual {
    let g = sol.grid;
    let n = g.n;
    let (hr, h3) = (g.hr(), g.h3());
    let at = |f: &[f64], k: usize, l: usize| f[l * n + k];
    let de = eta.derivative(t);
    let (mut sw, mut sw_scale, mut rad, mut rad_scale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut ver, mut ver_scale, mut vort, mut vort_scale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for l in 1..n - 1 {
        for k in 1..n - 1 {
            let r = g.r(k);
            let v = |kk, ll| at(&sol.v_theta, kk, ll);
            let vrr = (v(k + 1, l) - 2.0 * v(k, l) + v(k - 1, l)) / (hr * hr);
            let vr = (v(k + 1, l) - v(k - 1, l)) / (2.0 * hr);
            let v33 = (v(k, l + 1) - 2.0 * v(k, l) + v(k, l - 1)) / (h3 * h3);
            let lap = vrr + vr / r + v33 - v(k, l) / (r * r);
            let dt = de / r;
            sw = sw.max((lap - dt - at(&sol.forcing, k, l)).abs());
            sw_scale = sw_scale.max(vrr.abs() + (vr / r).abs() + (v(k, l) / (r * r)).abs() + dt.abs());
            let p = |kk, ll| at(&sol.pressure, kk, ll);
            let pr = (p(k + 1, l) - p(k - 1, l)) / (2.0 * hr);
            let cent = v(k, l) * v(k, l) / r;
            rad = rad.max((cent - pr).abs());
            rad_scale = rad_scale.max(cent.abs());
            ver = ver.max(((p(k, l + 1) - p(k, l - 1)) / (2.0 * h3)).abs());
            ver_scale = ver_scale.max(pr.abs());
            let w3 = (g.r(k + 1) * v(k + 1, l) - g.r(k - 1) * v(k - 1, l)) / (2.0 * hr * r);
            let wr = (v(k, l + 1) - v(k, l - 1)) / (2.0 * h3);
            vort = vort.max(w3.abs()).max(wr.abs());
            vort_scale = vort_scale.max((v(k, l) / r).abs());
        }
    }
    let rel = |x: f64, s: f64| if s > 0.0 { x / s } else { x };
    SlabResidual {
        j: g.j,
        h: 1.0 / (n - 1) as f64,
        swirl: rel(sw, sw_scale),
        radial: rel(rad, rad_scale),
        vertical: rel(ver, ver_scale),
        vorticity: rel(vort, vort_scale),
    }
}

/// `sup |v|` over the nodes of slab `S_j`.
pub fn slab_sup(sol: &SlabSolution) -> f64 {
    sol.v_theta.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Energy and dissipation of the cusp solution on `S_1 ∪ … ∪ S_M`.
#[derive(Debug, Clone, Serialize)]
pub struct CuspEnergy {
    pub beta: f64,
    pub eta: f64,
    /// `∫_{S_j} |v|²` per slab.
    pub slab_energy: Vec<f64>,
    /// `∫_{S_j} |∇v|²` per slab.
    pub slab_dissipation: Vec<f64>,
    pub partial_energy: Vec<f64>,
    pub partial_dissipation: Vec<f64>,
    /// `η² 2π ∫₀¹∫₀^{2^β r^β} r⁻¹ dx₃ dr = η² 2π 2^β/β`.
    pub energy_bound: f64,
    /// `η² 2π ∫₀¹∫₀^{2^β r^β} 2r⁻³ dx₃ dr = η² 4π 2^β/(β − 2)`, using `|∇v|² = 2η²/r⁴`.
    pub dissipation_bound: f64,
    /// Ratios of consecutive slab contributions.
    pub energy_ratios: Vec<f64>,
    pub dissipation_ratios: Vec<f64>,
}

impl CuspEnergy {
    /// Partial sums stay below the bounds and are Cauchy with ratio at most `2^{−(β−2)}`.
    pub fn converges(&self) -> bool {
        let q = 2f64.powf(-(self.beta - 2.0)) * (1.0 + 1e-9);
        let below = |p: &[f64], b: f64| p.iter().all(|&x| x <= b * (1.0 + 1e-12));
        let monotone = |p: &[f64]| p.windows(2).all(|w| w[1] >= w[0]);
        below(&self.partial_energy, self.energy_bound)
            && below(&self.partial_dissipation, self.dissipation_bound)
            && monotone(&self.partial_energy)
            && monotone(&self.partial_dissipation)
            && self.energy_ratios.iter().chain(&self.dissipation_ratios).all(|&r| r <= q)
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (odd) nodes.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = if n % 2 == 0 { n + 1 } else { n };
    let h = (b - a) / (n - 1) as f64;
    let mut s = f(a) + f(b);
    for k in 1..n - 1 {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Slab-by-slab quadrature of `∫|v|²` and `∫|∇v|²` for `v = (η(t)/r) e_θ`.
pub fn cusp_energy(domain: &CuspDomain<f64>, eta: &EtaProfile, t: f64, nodes: usize) -> Result<CuspEnergy, AnalyticError> {
    let beta = domain.beta();
    if !(beta > 2.0) {
        return Err(AnalyticError::Beta(beta));
    }
    let e = eta.value(t);
    let mut slab_energy = vec![];
    let mut slab_dissipation = vec![];
    for j in 1..=domain.depth() {
        let s = cusp_slab(j, domain)?;
        // Integrands are independent of x₃: |v|² = η²/r², |∇v|² = (∂ᵣv_θ)² + (v_θ/r)² = 2η²/r⁴.
        let en = 2.0 * PI * s.x3_hi * simpson(s.r_lo, s.r_hi, nodes, |r| e * e / (r * r) * r);
        let di = 2.0 * PI * s.x3_hi * simpson(s.r_lo, s.r_hi, nodes, |r| 2.0 * e * e / r.powi(4) * r);
        slab_energy.push(en);
        slab_dissipation.push(di);
    }
    let partial = |v: &[f64]| {
        v.iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect::<Vec<_>>()
    };
    let ratios = |v: &[f64]| v.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect::<Vec<_>>();
    let two_b = 2f64.powf(beta);
    Ok(CuspEnergy {
        beta,
        eta: e,
        partial_energy: partial(&slab_energy),
        partial_dissipation: partial(&slab_dissipation),
        energy_ratios: ratios(&slab_energy),
        dissipation_ratios: ratios(&slab_dissipation),
        slab_energy,
        slab_dissipation,
        energy_bound: e * e * 2.0 * PI * two_b / beta,
        dissipation_bound: e * e * 4.0 * PI * two_b / (beta - 2.0),
    })
}

/// Closed-form slab energy `2π η² 2^{−β(j−1)} ln 2`.
pub fn slab_energy_exact(beta: f64, j: u32, eta: f64) -> f64 {
    2.0 * PI * eta * eta * 2f64.powf(-beta * (j as f64 - 1.0)) * LN_2
}
