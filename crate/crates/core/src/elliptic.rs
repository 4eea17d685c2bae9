//! Five-point elliptic solves on the meridian rectangle, the Biot-Savart
//! recovery of the meridional velocity, and pressure reconstruction.
//!
//! Operators are written in conservative separable form
//!
//! ```text
//! L u = (1/w_r) ∂ρ(p_r ∂ρ u) + s(ρ) (1/w_a) ∂φ(p_a ∂φ u) + q u
//! ```
//!
//! and discretized as vertex-centred finite volumes: boundary nodes carrying a
//! Neumann or Robin condition own a half cell (a quarter cell at corners).

use crate::field::{ScalarField, VectorField};
use crate::geometry::{BoundaryLabel, Edge};
use crate::grid::{GridError, MeridianGrid};
use crate::linalg::{BandLu, BandMatrix, LinalgError};
use crate::norms::{integrate, l2, per_radius_mean};
use crate::ops::{convect_vector, divergence, laplacian_divfree};
use crate::real::Real;
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("boundary specification leaves the operator singular: {0}")]
    Degenerate(&'static str),
    #[error("residual {residual:.3e} above tolerance {tol:.3e}")]
    Residual { residual: f64, tol: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Condition on one edge; `n` is the outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition<T> {
    /// `u = g`.
    Dirichlet(T),
    /// `∂ₙu = g`.
    Neumann(T),
    /// `∂ₙu = c·u`.
    Robin(T),
}

impl<T: Real> BoundaryCondition<T> {
    fn is_dirichlet(&self) -> bool {
        matches!(self, Self::Dirichlet(_))
    }
    /// `(c, g)` in `∂ₙu = c·u + g`.
    fn flux(&self) -> (T, T) {
        match *self {
            Self::Dirichlet(_) => (T::zero(), T::zero()),
            Self::Neumann(g) => (T::zero(), g),
            Self::Robin(c) => (c, T::zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeConditions<T> {
    pub r1: BoundaryCondition<T>,
    pub r2: BoundaryCondition<T>,
    pub a1: BoundaryCondition<T>,
    pub a2: BoundaryCondition<T>,
}

impl<T: Real> EdgeConditions<T> {
    pub fn uniform(bc: BoundaryCondition<T>) -> Self {
        Self { r1: bc, r2: bc, a1: bc, a2: bc }
    }
    /// Walls `R1, R2` get `walls`; spheres `A1, A2` get `spheres`.
    pub fn walls_spheres(walls: BoundaryCondition<T>, spheres: BoundaryCondition<T>) -> Self {
        Self { r1: walls, r2: walls, a1: spheres, a2: spheres }
    }
    pub fn get(&self, e: Edge) -> BoundaryCondition<T> {
        match e {
            Edge::R1 => self.r1,
            Edge::R2 => self.r2,
            Edge::A1 => self.a1,
            Edge::A2 => self.a2,
        }
    }
}

/// Weight `w` and flux coefficient `p` of one separable factor, sampled on nodes and midpoints.
#[derive(Debug, Clone)]
struct Profile<T> {
    w: Vec<T>,
    p_node: Vec<T>,
    p_half: Vec<T>,
}

impl<T: Real> Profile<T> {
    fn sample(x: &[T], w: &dyn Fn(T) -> T, p: &dyn Fn(T) -> T) -> Self {
        let half = T::lit(0.5);
        Self {
            w: x.iter().map(|&t| w(t)).collect(),
            p_node: x.iter().map(|&t| p(t)).collect(),
            p_half: x.windows(2).map(|s| p(half * (s[0] + s[1]))).collect(),
        }
    }
}

/// Discrete row: Dirichlet value, or five-point coefficients plus an affine source.
#[derive(Debug, Clone, Copy)]
enum Row<T> {
    Dirichlet(T),
    Stencil { c: T, w: T, e: T, s: T, n: T, source: T },
}

/// A second-order operator with per-edge boundary conditions.
#[derive(Debug, Clone)]
pub struct EllipticOperator<T> {
    grid: Arc<MeridianGrid<T>>,
    radial: Profile<T>,
    angular: Profile<T>,
    ang_scale: Vec<T>,
    potential: Option<ScalarField<T>>,
    bcs: EdgeConditions<T>,
}

impl<T: Real> EllipticOperator<T> {
    /// `(1/w_r)∂ρ(p_r∂ρ) + ρ⁻² (1/w_a)∂φ(p_a∂φ) + q`.
    pub fn new(
        grid: &Arc<MeridianGrid<T>>,
        w_r: impl Fn(T) -> T,
        p_r: impl Fn(T) -> T,
        w_a: impl Fn(T) -> T,
        p_a: impl Fn(T) -> T,
        potential: Option<ScalarField<T>>,
        bcs: EdgeConditions<T>,
    ) -> Self {
        let radial = Profile::sample(grid.rhos(), &w_r, &p_r);
        let angular = Profile::sample(grid.phis(), &w_a, &p_a);
        let ang_scale = grid.rhos().iter().map(|&r| T::one() / (r * r)).collect();
        Self { grid: grid.clone(), radial, angular, ang_scale, potential, bcs }
    }

    /// The axisymmetric scalar Laplacian `ρ⁻²∂ρ(ρ²∂ρ) + (ρ² sinφ)⁻¹∂φ(sinφ ∂φ)`.
    pub fn laplacian(grid: &Arc<MeridianGrid<T>>, bcs: EdgeConditions<T>) -> Self {
        Self::new(grid, |r| r * r, |r| r * r, |p| p.sin(), |p| p.sin(), None, bcs)
    }

    pub fn grid(&self) -> &Arc<MeridianGrid<T>> {
        &self.grid
    }

    pub fn bcs(&self) -> &EdgeConditions<T> {
        &self.bcs
    }

    fn dirichlet_value(&self, i: usize, j: usize) -> Option<T> {
        let g = &self.grid;
        let sphere = if i == 0 {
            Some(self.bcs.a1)
        } else if i + 1 == g.n_rho() {
            Some(self.bcs.a2)
        } else {
            None
        };
        let wall = if j == 0 {
            Some(self.bcs.r1)
        } else if j + 1 == g.n_phi() {
            Some(self.bcs.r2)
        } else {
            None
        };
        for bc in [sphere, wall].into_iter().flatten() {
            if let BoundaryCondition::Dirichlet(v) = bc {
                return Some(v);
            }
        }
        None
    }

    fn row(&self, i: usize, j: usize) -> Row<T> {
        if let Some(v) = self.dirichlet_value(i, j) {
            return Row::Dirichlet(v);
        }
        let g = &self.grid;
        let two = T::lit(2.0);
        let (nr, np) = (g.n_rho(), g.n_phi());
        let (hr, hp) = (g.h_rho(), g.h_phi());
        let (mut c, mut w, mut e, mut s, mut n, mut source) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero(), T::zero());

        let rp = &self.radial;
        let f = T::one() / (rp.w[i] * hr * hr);
        if i == 0 || i + 1 == nr {
            let bc = if i == 0 { self.bcs.a1 } else { self.bcs.a2 };
            let (cb, gb) = bc.flux();
            let f = two * f;
            if i == 0 {
                e = f * rp.p_half[0];
                c = c - e;
            } else {
                w = f * rp.p_half[nr - 2];
                c = c - w;
            }
            c = c + f * hr * rp.p_node[i] * cb;
            source = source + f * hr * rp.p_node[i] * gb;
        } else {
            w = f * rp.p_half[i - 1];
            e = f * rp.p_half[i];
            c = c - w - e;
        }

        let ap = &self.angular;
        let f = self.ang_scale[i] / (ap.w[j] * hp * hp);
        if j == 0 || j + 1 == np {
            let bc = if j == 0 { self.bcs.r1 } else { self.bcs.r2 };
            let (cb, gb) = bc.flux();
            let f = two * f;
            if j == 0 {
                n = f * ap.p_half[0];
                c = c - n;
            } else {
                s = f * ap.p_half[np - 2];
                c = c - s;
            }
            c = c + f * hp * ap.p_node[j] * cb;
            source = source + f * hp * ap.p_node[j] * gb;
        } else {
            s = f * ap.p_half[j - 1];
            n = f * ap.p_half[j];
            c = c - s - n;
        }

        if let Some(q) = &self.potential {
            c = c + q.at(i, j);
        }
        Row::Stencil { c, w, e, s, n, source }
    }

    /// `L u` at every non-Dirichlet node (affine boundary data included); zero on Dirichlet nodes.
    pub fn apply(&self, u: &ScalarField<T>) -> ScalarField<T> {
        let g = &self.grid;
        let (nr, np) = (g.n_rho(), g.n_phi());
        ScalarField::from_index_fn(g, |i, j| match self.row(i, j) {
            Row::Dirichlet(_) => T::zero(),
            Row::Stencil { c, w, e, s, n, source } => {
                let mut acc = c * u.at(i, j) + source;
                if i > 0 {
                    acc = acc + w * u.at(i - 1, j);
                }
                if i + 1 < nr {
                    acc = acc + e * u.at(i + 1, j);
                }
                if j > 0 {
                    acc = acc + s * u.at(i, j - 1);
                }
                if j + 1 < np {
                    acc = acc + n * u.at(i, j + 1);
                }
                acc
            }
        })
    }

    /// True when the operator has a nontrivial kernel by construction
    /// (no Dirichlet or absorbing Robin edge and no potential).
    fn is_degenerate(&self) -> bool {
        let anchored = [self.bcs.r1, self.bcs.r2, self.bcs.a1, self.bcs.a2]
            .iter()
            .any(|b| b.is_dirichlet() || matches!(b, BoundaryCondition::Robin(c) if *c != T::zero()));
        !anchored && self.potential.is_none()
    }

    fn ordering(&self) -> Ordering {
        let g = &self.grid;
        Ordering { n_rho: g.n_rho(), n_phi: g.n_phi(), rho_fast: g.n_rho() <= g.n_phi() }
    }

    /// Factorizes `shift·I + scale·L` (Dirichlet rows become the identity).
    pub fn factor_shifted(&self, shift: T, scale: T) -> Result<FactoredOperator<T>, EllipticError> {
        if shift == T::zero() && self.is_degenerate() {
            return Err(EllipticError::Degenerate("pure Neumann problem without potential"));
        }
        let ord = self.ordering();
        let bw = ord.bandwidth();
        let g = &self.grid;
        let mut m = BandMatrix::zeros(g.len(), bw, bw);
        for (i, j) in g.nodes() {
            let k = ord.index(i, j);
            match self.row(i, j) {
                Row::Dirichlet(_) => m.add(k, k, T::one())?,
                Row::Stencil { c, w, e, s, n, .. } => {
                    m.add(k, k, shift + scale * c)?;
                    if i > 0 {
                        m.add(k, ord.index(i - 1, j), scale * w)?;
                    }
                    if i + 1 < g.n_rho() {
                        m.add(k, ord.index(i + 1, j), scale * e)?;
                    }
                    if j > 0 {
                        m.add(k, ord.index(i, j - 1), scale * s)?;
                    }
                    if j + 1 < g.n_phi() {
                        m.add(k, ord.index(i, j + 1), scale * n)?;
                    }
                }
            }
        }
        let lu = m.factor()?;
        Ok(FactoredOperator { op: self.clone(), lu, ord, shift, scale })
    }

    pub fn factor(&self) -> Result<FactoredOperator<T>, EllipticError> {
        self.factor_shifted(T::zero(), T::one())
    }
}

#[derive(Debug, Clone, Copy)]
struct Ordering {
    n_rho: usize,
    n_phi: usize,
    rho_fast: bool,
}

impl Ordering {
    fn bandwidth(&self) -> usize {
        if self.rho_fast {
            self.n_rho
        } else {
            self.n_phi
        }
    }
    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        if self.rho_fast {
            j * self.n_rho + i
        } else {
            i * self.n_phi + j
        }
    }
}

/// Solve diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    /// Direct solves report a single pass.
    pub iterations: usize,
    /// Relative residual `‖A u − f‖₂ / ‖f‖₂`.
    pub residual: f64,
    pub wall_time: Duration,
}

/// LU-factorized `shift·I + scale·L`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct FactoredOperator<T> {
    op: EllipticOperator<T>,
    lu: BandLu<T>,
    ord: Ordering,
    shift: T,
    scale: T,
}

impl<T: Real> FactoredOperator<T> {
    pub fn operator(&self) -> &EllipticOperator<T> {
        &self.op
    }

    /// Solves `(shift + scale·L) u = f` at free nodes with `u = g` at Dirichlet nodes.
    pub fn solve(&self, f: &ScalarField<T>) -> Result<(ScalarField<T>, SolveStats), EllipticError> {
        let start = Instant::now();
        let g = self.op.grid.clone();
        let mut b = vec![T::zero(); g.len()];
        for (i, j) in g.nodes() {
            b[self.ord.index(i, j)] = match self.op.row(i, j) {
                Row::Dirichlet(v) => v,
                Row::Stencil { source, .. } => f.at(i, j) - self.scale * source,
            };
        }
        let rhs_norm = b.iter().map(|&x| x * x).sum::<T>().sqrt();
        self.lu.solve_in_place(&mut b)?;
        let u = ScalarField::from_index_fn(&g, |i, j| b[self.ord.index(i, j)]);

        let lu_ = self.op.apply(&u);
        let mut r2 = T::zero();
        for (i, j) in g.nodes() {
            let r = match self.op.row(i, j) {
                Row::Dirichlet(v) => u.at(i, j) - v,
                Row::Stencil { .. } => self.shift * u.at(i, j) + self.scale * lu_.at(i, j) - f.at(i, j),
            };
            r2 = r2 + r * r;
        }
        let residual = if rhs_norm > T::zero() { r2.sqrt() / rhs_norm } else { r2.sqrt() };
        let tol = T::epsilon().sqrt();
        if !(residual <= tol) {
            return Err(EllipticError::Residual { residual: residual.as_f64(), tol: tol.as_f64() });
        }
        Ok((u, SolveStats { iterations: 1, residual: residual.as_f64(), wall_time: start.elapsed() }))
    }
}

/// Operator plus right-hand side.
#[derive(Debug, Clone)]
pub struct EllipticProblem<T> {
    pub operator: EllipticOperator<T>,
    pub rhs: ScalarField<T>,
}

impl<T: Real> EllipticProblem<T> {
    pub fn solve(&self) -> Result<(ScalarField<T>, SolveStats), EllipticError> {
        self.operator.factor()?.solve(&self.rhs)
    }
}

fn edge_max_abs<T: Real>(u: &ScalarField<T>, walls: bool) -> T {
    let g = u.grid();
    g.nodes()
        .filter(|&(i, j)| {
            let l = g.label(i, j);
            l == BoundaryLabel::Corner
                || if walls {
                    matches!(l, BoundaryLabel::R1 | BoundaryLabel::R2)
                } else {
                    matches!(l, BoundaryLabel::A1 | BoundaryLabel::A2)
                }
        })
        .fold(T::zero(), |m, (i, j)| m.max(u.at(i, j).abs()))
}

fn check_edge_zero<T: Real>(u: &ScalarField<T>, walls: bool, what: &str) -> Result<(), EllipticError> {
    let edge = edge_max_abs(u, walls);
    let scale = u.max_abs();
    if edge > T::lit(1e3) * T::epsilon() * scale.max(T::min_positive_value()) {
        return Err(EllipticError::Precondition(format!(
            "{what} must vanish on the {}: max boundary value {:.3e}",
            if walls { "walls" } else { "spheres" },
            edge.as_f64()
        )));
    }
    Ok(())
}

/// Mismatch report of one Biot-Savart recovery.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BiotSavartAudit {
    pub div_l2: f64,
    /// `max |ρ² div b|`.
    pub h_max: f64,
    /// `max_ρ |ρ ∫ v_ρ sinφ dφ|`.
    pub mean_max: f64,
    pub residual_rho: f64,
    pub residual_phi: f64,
}

/// Factorized solvers for `f̃ = ρ v_ρ` and `g̃ = ρ v_φ` on a fixed grid.
#[derive(Debug, Clone)]
pub struct BiotSavart<T> {
    grid: Arc<MeridianGrid<T>>,
    f_op: FactoredOperator<T>,
    g_op: FactoredOperator<T>,
}

impl<T: Real> BiotSavart<T> {
    pub fn new(grid: &Arc<MeridianGrid<T>>) -> Result<Self, EllipticError> {
        use BoundaryCondition::{Dirichlet, Neumann};
        let zero = T::zero();
        let f_op = EllipticOperator::laplacian(grid, EdgeConditions::walls_spheres(Neumann(zero), Dirichlet(zero)))
            .factor()?;
        let q = ScalarField::from_index_fn(grid, |i, j| {
            let (r, s) = (grid.rho(i), grid.sin(j));
            -T::one() / (r * r * s * s)
        });
        let g_op = EllipticOperator::new(
            grid,
            |r| r * r,
            |r| r * r,
            |p| p.sin(),
            |p| p.sin(),
            Some(q),
            EdgeConditions::walls_spheres(Dirichlet(zero), Neumann(zero)),
        )
        .factor()?;
        Ok(Self { grid: grid.clone(), f_op, g_op })
    }

    /// Right-hand side `−(ρ/sinφ) ∂φ(sin²φ Ω̃)` in flux form.
    fn rhs_rho(&self, om: &ScalarField<T>) -> ScalarField<T> {
        let g = &self.grid;
        let q = om.map_indexed(|_, j, x| g.sin(j) * g.sin(j) * x);
        let d = flux_diff(&q, false);
        d.map_indexed(|i, j, x| -g.rho(i) / g.sin(j) * x)
    }

    /// Right-hand side `ρ⁻² ∂ρ(ρ⁴ sinφ Ω̃)` in flux form.
    fn rhs_phi(&self, om: &ScalarField<T>) -> ScalarField<T> {
        let g = &self.grid;
        let s = om.map_indexed(|i, j, x| g.rho(i).powi(4) * g.sin(j) * x);
        let d = flux_diff(&s, true);
        d.map_indexed(|i, _, x| x / (g.rho(i) * g.rho(i)))
    }

    pub fn solve_vrho(&self, om: &ScalarField<T>) -> Result<(ScalarField<T>, SolveStats), EllipticError> {
        check_edge_zero(om, true, "Omega")?;
        let (f, st) = self.f_op.solve(&self.rhs_rho(om))?;
        Ok((f.map_indexed(|i, _, x| x / self.grid.rho(i)), st))
    }

    pub fn solve_vphi(&self, om: &ScalarField<T>) -> Result<(ScalarField<T>, SolveStats), EllipticError> {
        check_edge_zero(om, false, "Omega")?;
        let (f, st) = self.g_op.solve(&self.rhs_phi(om))?;
        Ok((f.map_indexed(|i, _, x| x / self.grid.rho(i)), st))
    }

    /// `b = v_ρ e_ρ + v_φ e_φ` with its divergence audit.
    pub fn assemble_b(&self, om: &ScalarField<T>) -> Result<(VectorField<T>, BiotSavartAudit), EllipticError> {
        let (vr, sr) = self.solve_vrho(om)?;
        let (vp, sp) = self.solve_vphi(om)?;
        let b = VectorField::meridional(vr, vp);
        let audit = divergence_audit(&b);
        Ok((b, BiotSavartAudit { residual_rho: sr.residual, residual_phi: sp.residual, ..audit }))
    }
}

/// Divergence-free audit of a meridional field.
pub fn divergence_audit<T: Real>(b: &VectorField<T>) -> BiotSavartAudit {
    let g = b.grid();
    let div = divergence(b);
    let h = div.map_indexed(|i, _, x| g.rho(i) * g.rho(i) * x);
    let means = per_radius_mean(&b.rho);
    let mean_max = means.iter().enumerate().fold(T::zero(), |m, (i, &x)| m.max((g.rho(i) * x).abs()));
    BiotSavartAudit {
        div_l2: l2(&div).as_f64(),
        h_max: h.max_abs().as_f64(),
        mean_max: mean_max.as_f64(),
        residual_rho: 0.0,
        residual_phi: 0.0,
    }
}

/// Flux-form first difference: central inside, `(u₁ − u₀)/h` on the end nodes.
fn flux_diff<T: Real>(u: &ScalarField<T>, along_rho: bool) -> ScalarField<T> {
    let g = u.grid();
    let two = T::lit(2.0);
    ScalarField::from_index_fn(g, |i, j| {
        let (k, n, h) = if along_rho { (i, g.n_rho(), g.h_rho()) } else { (j, g.n_phi(), g.h_phi()) };
        let at = |m: usize| if along_rho { u.at(m, j) } else { u.at(i, m) };
        if k == 0 {
            (at(1) - at(0)) / h
        } else if k + 1 == n {
            (at(n - 1) - at(n - 2)) / h
        } else {
            (at(k + 1) - at(k - 1)) / (two * h)
        }
    })
}

pub fn solve_vrho<T: Real>(om: &ScalarField<T>) -> Result<ScalarField<T>, EllipticError> {
    Ok(BiotSavart::new(om.grid())?.solve_vrho(om)?.0)
}

pub fn solve_vphi<T: Real>(om: &ScalarField<T>) -> Result<ScalarField<T>, EllipticError> {
    Ok(BiotSavart::new(om.grid())?.solve_vphi(om)?.0)
}

pub fn assemble_b<T: Real>(om: &ScalarField<T>) -> Result<(VectorField<T>, BiotSavartAudit), EllipticError> {
    BiotSavart::new(om.grid())?.assemble_b(om)
}

/// Reconstructed pressure with its path-independence diagnostics.
#[derive(Debug, Clone)]
pub struct Pressure<T> {
    pub p: ScalarField<T>,
    /// Largest circulation of `(B_ρ, ρB_φ)` around a grid cell, divided by the cell area.
    pub loop_defect: T,
    /// `10·h²·max(|B_ρ|, |ρB_φ|)/ρ_min²`, the defect expected from truncation alone.
    pub defect_estimate: T,
    pub warning: bool,
}

/// Integrates `∂ρP = B_ρ`, `∂φP = ρB_φ` (ρ first along φ = π/2, then φ) and
/// normalizes `∫P dx = 0`.
pub fn recover_pressure<T: Real>(v: &VectorField<T>, dvdt: &VectorField<T>) -> Pressure<T> {
    let g = v.grid().clone();
    let lap = laplacian_divfree(v);
    let cv = convect_vector(v);
    let half = T::lit(0.5);
    // The momentum equations with the pressure gradient removed.
    let br = ScalarField::from_index_fn(&g, |i, j| lap.rho.at(i, j) - cv.rho.at(i, j) - dvdt.rho.at(i, j));
    let bp = ScalarField::from_index_fn(&g, |i, j| lap.phi.at(i, j) - cv.phi.at(i, j) - dvdt.phi.at(i, j));
    let gp = bp.map_indexed(|i, _, x| g.rho(i) * x);

    let (nr, np) = (g.n_rho(), g.n_phi());
    let (hr, hp) = (g.h_rho(), g.h_phi());
    let jm = np / 2;
    let mut p = ScalarField::zeros(&g);
    for i in 1..nr {
        let val = p.at(i - 1, jm) + half * hr * (br.at(i - 1, jm) + br.at(i, jm));
        p.set(i, jm, val);
    }
    for i in 0..nr {
        for j in jm + 1..np {
            let val = p.at(i, j - 1) + half * hp * (gp.at(i, j - 1) + gp.at(i, j));
            p.set(i, j, val);
        }
        for j in (0..jm).rev() {
            let val = p.at(i, j + 1) - half * hp * (gp.at(i, j + 1) + gp.at(i, j));
            p.set(i, j, val);
        }
    }
    let mean = integrate(&p) / integrate(&ScalarField::constant(&g, T::one()));
    let p = p.map(|x| x - mean);

    let mut defect = T::zero();
    for j in 0..np - 1 {
        for i in 0..nr - 1 {
            let c = half * hr * (br.at(i, j) + br.at(i + 1, j)) + half * hp * (gp.at(i + 1, j) + gp.at(i + 1, j + 1))
                - half * hr * (br.at(i, j + 1) + br.at(i + 1, j + 1))
                - half * hp * (gp.at(i, j) + gp.at(i, j + 1));
            defect = defect.max(c.abs() / (hr * hp));
        }
    }
    let bmax = br.max_abs().max(gp.max_abs());
    let rmin = g.domain().rho_min();
    let h = g.h();
    let estimate = T::lit(10.0) * h * h * bmax / (rmin * rmin);
    Pressure { p, loop_defect: defect, defect_estimate: estimate, warning: defect > T::lit(10.0) * estimate }
}
