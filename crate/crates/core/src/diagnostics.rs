//! Per-time diagnostics rows and the trajectory audits built from them.
//!
//! Every audit is a pure function of the rows plus a small [`AuditContext`], so a
//! stored run can be re-audited without re-solving.

use crate::elliptic::recover_pressure;
use crate::field::{ScalarField, VectorField};
use crate::norms::{integrate, l2, l6};
use crate::ops::{
    convect_vector, curl, d_phi, d_rho, derived_quantities, divergence, eoo_project, grad_sq, grad_vector,
    laplacian_divfree,
};
use crate::parabolic::omega_theta_residual;
use crate::solver::{SimulationState, Trajectory};
use crate::{Grid, Scalar, Vector};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

/// Quantities monitored at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub t: f64,
    pub window: usize,
    /// `‖v‖²`.
    pub energy: f64,
    /// `‖∇×v‖²` at this time.
    pub curl_sq: f64,
    /// `‖∇v‖²` at this time.
    pub grad_sq: f64,
    /// `∫₀ᵗ ‖∇×v‖²`, filled when the trajectory is assembled.
    pub curl_dissipation: f64,
    /// `∫₀ᵗ ‖∇v‖²`.
    pub grad_dissipation: f64,
    pub gamma_sup: f64,
    pub v_sup: f64,
    pub omega_theta_sup: f64,
    pub omega_theta_l2: f64,
    /// `‖(|v_ρ| + |v_φ| + |v_θ|)/ρ‖_{L⁶}`.
    pub v_over_rho_l6: f64,
    /// `∫K²`, `∫F²`, `∫Ω²`.
    pub kfo_energy: [f64; 3],
    /// `∫|∇K|²`, `∫|∇F|²`, `∫|∇Ω|²`.
    pub kfo_grad_sq: [f64; 3],
    /// Right-hand-side integrands of the K, F, Ω energy identities.
    pub kfo_identity_rhs: [f64; 3],
    pub eoo_residual: f64,
    /// `L²` norms of the ρ, φ, θ momentum residuals over nodes [`RESIDUAL_MARGIN`] cells inside.
    pub momentum_residual: [f64; 3],
    /// `‖Δv‖ + ‖v·∇v‖ + ‖∂ₜv‖`.
    pub momentum_scale: f64,
    pub divergence_l2: f64,
    pub pressure_loop_defect: f64,
    pub pressure_warning: bool,
    /// `∫ v·∂ₜv`.
    pub weak_time: f64,
    /// `∫ (v·∇v)·v`.
    pub weak_convection: f64,
    /// `‖Δv‖`, the logged second-derivative norm.
    pub laplacian_l2: f64,
    pub dvdt_l2: f64,
    /// `‖∂ₜ²v‖` from the second difference of the nearest three levels (0 if unavailable).
    pub d2vdt2_l2: f64,
    /// `‖ω_θ − ρ sinφ Ω̃‖` over interior nodes.
    pub fixed_point_defect: f64,
    /// `‖` residual of the `ω_θ` equation `‖`.
    pub omega_theta_eq_residual: f64,
    /// Left sides of the five transfer estimates, in [`TRANSFER_CONSTANTS`] order.
    pub transfer_lhs: [f64; 5],
    /// `‖Ω‖`, `‖∇Ω‖`, `‖∇K‖ + ‖∇F‖`.
    pub transfer_norms: [f64; 3],
}

/// Names, constants and right-hand-side norm index of the transfer estimates.
pub const TRANSFER_CONSTANTS: [(&str, f64, usize); 5] = [
    ("grad(v_rho/rho) <= sqrt3 |Omega|", 1.732_050_807_568_877_2, 0),
    ("rho^-1 grad(v_rho/rho) <= sqrt44 |grad Omega|", 6.633_249_580_710_799_5, 1),
    ("grad(v_phi/rho) <= sqrt3 |Omega|", 1.732_050_807_568_877_2, 0),
    ("rho^-1 grad(v_phi/rho) <= 20 |grad Omega|", 20.0, 1),
    ("rho^-1 grad(v_theta/rho) <= 2sqrt3 (|grad K| + |grad F|)", 3.464_101_615_137_754_6, 2),
];

/// Nodes at least this many cells from the boundary carry the strong-form residuals.
pub const RESIDUAL_MARGIN: usize = 2;

/// Weighted `L²` norm over nodes at least `margin` cells inside the boundary.
pub fn interior_l2(f: &Scalar, margin: usize) -> f64 {
    let g = f.grid();
    let inside = |k: usize, n: usize| k >= margin && k + margin < n;
    g.nodes()
        .filter(|&(i, j)| inside(i, g.n_rho()) && inside(j, g.n_phi()))
        .map(|(i, j)| g.weight(i, j) * f.at(i, j).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn rho_scaled(f: &Scalar, p: i32) -> Scalar {
    let g = f.grid().clone();
    f.map_indexed(|i, _, x| x * g.rho(i).powi(p))
}

/// Diagnostics of `state` given its time derivatives.
pub fn compute_row(
    state: &SimulationState,
    window: usize,
    dvdt: &Vector,
    domega_dt: &Scalar,
    d2vdt2_l2: f64,
) -> DiagnosticsReport {
    let g = state.grid().clone();
    let v = state.velocity();
    let w = curl(&v);
    let d = derived_quantities(&v, &w);
    let lap = laplacian_divfree(&v);
    let conv = convect_vector(&v);

    let pressure = recover_pressure(&v, dvdt);
    let (pr, pp) = (d_rho(&pressure.p), d_phi(&pressure.p));
    let res_r = ScalarField::from_index_fn(&g, |i, j| lap.rho.at(i, j) - conv.rho.at(i, j) - dvdt.rho.at(i, j) - pr.at(i, j));
    let res_p = ScalarField::from_index_fn(&g, |i, j| {
        lap.phi.at(i, j) - conv.phi.at(i, j) - dvdt.phi.at(i, j) - pp.at(i, j) / g.rho(i)
    });
    let res_t = lap.theta.sub(&conv.theta).sub(&dvdt.theta);
    let vl2 = |x: &Vector| integrate(&x.norm_sq()).sqrt();

    let mag_over_rho = ScalarField::from_index_fn(&g, |i, j| {
        (v.rho.at(i, j).abs() + v.phi.at(i, j).abs() + v.theta.at(i, j).abs()) / g.rho(i)
    });
    let v_sup = v.norm_sq().max().sqrt();

    let kfo = [&d.k, &d.f, &d.omega];
    let grads = kfo.map(|x| (d_rho(x), d_phi(x)));
    let kfo_grad_sq = kfo.map(|x| integrate(&grad_sq(x)));

    // Identity right-hand sides.
    let vr_r = rho_scaled(&v.rho, -1);
    let vp_r = rho_scaled(&v.phi, -1);
    let (drr, dpr) = (d_rho(&vr_r), d_phi(&vr_r));
    let (drp, dpp) = (d_rho(&vp_r), d_phi(&vp_r));
    let (kr, kp) = &grads[0];
    let (fr, fp) = &grads[1];
    let rhs_k = ScalarField::from_index_fn(&g, |i, j| {
        let (r, k) = (g.rho(i), d.k.at(i, j));
        3.0 * k * k / (r * r) - 2.0 * k / r * kr.at(i, j)
            + v.theta.at(i, j) / r * (dpr.at(i, j) * kr.at(i, j) - drr.at(i, j) * kp.at(i, j))
    });
    let rhs_f = ScalarField::from_index_fn(&g, |i, j| {
        let (r, c, f) = (g.rho(i), g.cot(j), d.f.at(i, j));
        (1.0 - c * c) / (r * r) * f * f - 2.0 * c / (r * r) * f * fp.at(i, j) + 2.0 * kp.at(i, j) * f / (r * r)
            + v.theta.at(i, j) / r * (dpp.at(i, j) * fr.at(i, j) - drp.at(i, j) * fp.at(i, j))
    });
    let rhs_o = ScalarField::from_index_fn(&g, |i, j| {
        let (r, s, c) = (g.rho(i), g.sin(j), g.cos(j));
        let vt = v.theta.at(i, j);
        let om = d.omega.at(i, j);
        -2.0 * vt / (r * s) * d.k.at(i, j) * om - 2.0 * vt * c / (r * s * s) * d.f.at(i, j) * om
    });

    let transfer_lhs = {
        let vt_r = rho_scaled(&v.theta, -1);
        let n = |f: &Scalar| integrate(&grad_sq(f)).sqrt();
        let nr = |f: &Scalar| integrate(&rho_scaled(&grad_sq(f), -2)).sqrt();
        [n(&vr_r), nr(&vr_r), n(&vp_r), nr(&vp_r), nr(&vt_r)]
    };
    let grad_k = kfo_grad_sq[0].sqrt();
    let grad_f = kfo_grad_sq[1].sqrt();

    let om_state = state.omega.map_indexed(|i, j, x| g.rho(i) * g.sin(j) * x);

    DiagnosticsReport {
        t: state.t,
        window,
        energy: integrate(&v.norm_sq()),
        curl_sq: integrate(&w.norm_sq()),
        grad_sq: integrate(&grad_vector(&v).frobenius_sq()),
        curl_dissipation: 0.0,
        grad_dissipation: 0.0,
        gamma_sup: state.gamma.max_abs(),
        v_sup,
        omega_theta_sup: w.theta.max_abs(),
        omega_theta_l2: l2(&w.theta),
        v_over_rho_l6: l6(&mag_over_rho),
        kfo_energy: kfo.map(|x| integrate(&x.mul(x))),
        kfo_grad_sq,
        kfo_identity_rhs: [integrate(&rhs_k), integrate(&rhs_f), integrate(&rhs_o)],
        eoo_residual: eoo_project(&v).map(|(_, r)| r).unwrap_or(f64::NAN),
        momentum_residual: [res_r, res_p, res_t].map(|f| interior_l2(&f, RESIDUAL_MARGIN)),
        momentum_scale: vl2(&lap) + vl2(&conv) + vl2(dvdt),
        divergence_l2: l2(&divergence(&v)),
        pressure_loop_defect: pressure.loop_defect,
        pressure_warning: pressure.warning,
        weak_time: integrate(&v.dot(dvdt)),
        weak_convection: integrate(&conv.dot(&v)),
        laplacian_l2: vl2(&lap),
        dvdt_l2: vl2(dvdt),
        d2vdt2_l2,
        fixed_point_defect: interior_l2(&w.theta.sub(&om_state), 1),
        omega_theta_eq_residual: interior_l2(&omega_theta_residual(&v, &state.omega, domega_dt), RESIDUAL_MARGIN),
        transfer_lhs,
        transfer_norms: [l2(&d.omega), kfo_grad_sq[2].sqrt(), grad_k + grad_f],
    }
}

/// Streams states in time order and emits rows with centred time differences
/// (one-sided at the two ends).
#[derive(Debug)]
pub struct RowBuilder {
    grid: Arc<Grid>,
    buf: Vec<(SimulationState, usize)>,
    emitted: usize,
    pending: std::collections::VecDeque<DiagnosticsReport>,
    last_d2: f64,
}

impl RowBuilder {
    pub fn new(grid: Arc<Grid>, _dt: f64) -> Self {
        Self { grid, buf: Vec::with_capacity(3), emitted: 0, pending: Default::default(), last_d2: 0.0 }
    }

    fn row(&self, k: usize, a: usize, b: usize) -> DiagnosticsReport {
        let (s, win) = &self.buf[k];
        let (sa, sb) = (&self.buf[a].0, &self.buf[b].0);
        let dt = sb.t - sa.t;
        let dv = sb.velocity().sub(&sa.velocity()).scale(1.0 / dt);
        let dom = sb.omega.sub(&sa.omega).scale(1.0 / dt);
        compute_row(s, *win, &dv, &dom, self.second_derivative())
    }

    /// `‖∂ₜ²v‖` from the buffered levels, when there are three.
    fn second_derivative(&self) -> f64 {
        if self.buf.len() < 3 {
            return 0.0;
        }
        let [a, b, c] = [0, 1, 2].map(|k| &self.buf[k].0);
        let (h1, h2) = (b.t - a.t, c.t - b.t);
        let (va, vb, vc) = (a.velocity(), b.velocity(), c.velocity());
        let d1 = vb.sub(&va).scale(1.0 / h1);
        let d2 = vc.sub(&vb).scale(1.0 / h2);
        integrate(&d2.sub(&d1).scale(2.0 / (h1 + h2)).norm_sq()).sqrt()
    }

    pub fn push(&mut self, state: &SimulationState, window: usize) -> Option<DiagnosticsReport> {
        self.buf.push((state.clone(), window));
        let out = match self.buf.len() {
            3 => {
                let mut out = vec![];
                if self.emitted == 0 {
                    out.push(self.row(0, 0, 1));
                }
                out.push(self.row(1, 0, 2));
                self.last_d2 = self.second_derivative();
                self.buf.remove(0);
                Some(out)
            }
            _ => None,
        };
        let out = out.unwrap_or_default();
        self.emitted += out.len();
        self.pending.extend(out);
        self.pending.pop_front()
    }

    pub fn finish(mut self) -> Vec<DiagnosticsReport> {
        let mut out: Vec<DiagnosticsReport> = self.pending.drain(..).collect();
        match self.buf.len() {
            1 if self.emitted == 0 => {
                let z = VectorField::zeros(&self.grid);
                out.push(compute_row(&self.buf[0].0, self.buf[0].1, &z, &ScalarField::zeros(&self.grid), 0.0));
            }
            2 => {
                if self.emitted == 0 {
                    out.push(self.row(0, 0, 1));
                }
                let mut r = self.row(1, 0, 1);
                r.d2vdt2_l2 = self.last_d2;
                out.push(r);
            }
            _ => {}
        }
        out
    }
}

/// Trapezoid running integral of `f(row)` over the rows.
pub fn running_integral(rows: &[DiagnosticsReport], f: impl Fn(&DiagnosticsReport) -> f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if k > 0 {
            let p = &rows[k - 1];
            acc += 0.5 * (r.t - p.t) * (f(p) + f(r));
        }
        out.push(acc);
    }
    out
}

/// Fills the running dissipation integrals.
pub fn accumulate(rows: &mut [DiagnosticsReport]) {
    let c = running_integral(rows, |r| r.curl_sq);
    let g = running_integral(rows, |r| r.grad_sq);
    for (r, (c, g)) in rows.iter_mut().zip(c.into_iter().zip(g)) {
        r.curl_dissipation = c;
        r.grad_dissipation = g;
    }
}

/// Run-level facts the audits need besides the rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditContext {
    pub alpha: f64,
    pub m: u32,
    /// `max(hρ, hφ)`.
    pub h: f64,
    pub dt: f64,
    pub gamma0_sup: f64,
    /// Initial data is even-odd-odd to round-off.
    pub eoo_data: bool,
    /// `‖∇v₀‖²`.
    pub v0_grad_sq: f64,
    /// Largest Picard contraction ratio per window.
    pub window_ratios: Vec<Option<f64>>,
    /// Tolerance multiplier `c`.
    pub c: f64,
    /// Allowed growth of consecutive window maxima.
    pub growth: f64,
}

impl AuditContext {
    pub fn from_trajectory(traj: &Trajectory, c: f64, growth: f64) -> Self {
        let cfg = &traj.config;
        let g = traj.snapshots.first().map(|s| s.state.grid().clone());
        let h = g.as_ref().map(|g| g.h()).unwrap_or(f64::NAN);
        let v0_grad_sq = traj.snapshots.first().map(|s| crate::norms::vector_grad_l2(&s.state.velocity()).powi(2)).unwrap_or(0.0);
        Self {
            alpha: cfg.alpha,
            m: cfg.m,
            h,
            dt: cfg.dt,
            gamma0_sup: traj.gamma0_sup,
            eoo_data: traj.admissibility.eoo_ok,
            v0_grad_sq,
            window_ratios: traj.windows.iter().map(|w| w.max_ratio()).collect(),
            c,
            growth,
        }
    }

    /// `c·(h² + Δt)`.
    pub fn tol2(&self) -> f64 {
        self.c * (self.h * self.h + self.dt)
    }

    /// `c·(h + Δt)`.
    pub fn tol1(&self) -> f64 {
        self.c * (self.h + self.dt)
    }
}

/// Verdict of one audit. `pass` is `None` when a hypothesis is unmet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub name: String,
    pub hypothesis_met: bool,
    pub pass: Option<bool>,
    /// Worst case over the trajectory: `lhs ≤ rhs` (or `|lhs − rhs|` for identities).
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub worst_time: f64,
    pub note: String,
}

impl AuditResult {
    fn inequality(name: &str, rows: &[DiagnosticsReport], lhs: &[f64], rhs: &[f64], tol: f64) -> Self {
        let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0);
        for (k, (&l, &r)) in lhs.iter().zip(rhs).enumerate() {
            let s = r - l;
            if s < worst.0 || s.is_nan() {
                worst = (s, l, r, rows.get(k).map_or(0.0, |x| x.t));
            }
        }
        if lhs.is_empty() {
            worst = (0.0, 0.0, 0.0, 0.0);
        }
        let pass = worst.0 >= -tol;
        AuditResult {
            name: name.into(),
            hypothesis_met: true,
            pass: Some(pass),
            lhs: worst.1,
            rhs: worst.2,
            slack: worst.0,
            tolerance: tol,
            worst_time: worst.3,
            note: String::new(),
        }
    }

    fn identity(name: &str, rows: &[DiagnosticsReport], lhs: &[f64], rhs: &[f64], tol: f64) -> Self {
        let mut worst = (0.0f64, 0.0, 0.0, 0.0);
        for (k, (&l, &r)) in lhs.iter().zip(rhs).enumerate() {
            let e = (l - r).abs();
            if e > worst.0 || e.is_nan() {
                worst = (e, l, r, rows[k].t);
            }
        }
        AuditResult {
            name: name.into(),
            hypothesis_met: true,
            pass: Some(worst.0 <= tol),
            lhs: worst.1,
            rhs: worst.2,
            slack: -worst.0,
            tolerance: tol,
            worst_time: worst.3,
            note: String::new(),
        }
    }

    fn gated(mut self, met: bool, why: &str) -> Self {
        if !met {
            self.note = format!("hypothesis unmet: {why}; measured verdict {}", if self.pass == Some(true) { "pass" } else { "fail" });
            self.hypothesis_met = false;
            self.pass = None;
        }
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if !note.is_empty() {
            self.note = if self.note.is_empty() { note } else { format!("{}; {note}", self.note) };
        }
        self
    }
}

/// Energy identity `E(t) + 2∫₀ᵗ‖∇×v‖² = E(0)` and inequality `E(t) + (2/3)∫₀ᵗ‖∇v‖² ≤ E(0)`.
pub fn energy_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> Vec<AuditResult> {
    let e0 = rows.first().map_or(0.0, |r| r.energy);
    let curl = running_integral(rows, |r| r.curl_sq);
    let grad = running_integral(rows, |r| r.grad_sq);
    let scale = e0.max(f64::MIN_POSITIVE);
    let tol = ctx.tol2() * scale;
    let lhs: Vec<f64> = rows.iter().zip(&curl).map(|(r, c)| r.energy + 2.0 * c).collect();
    let id = AuditResult::identity("energy identity", rows, &lhs, &vec![e0; rows.len()], tol)
        .with_note(cadence_note(rows));
    let lhs: Vec<f64> = rows.iter().zip(&grad).map(|(r, g)| r.energy + 2.0 / 3.0 * g).collect();
    let ineq = AuditResult::inequality("energy inequality (2/3)", rows, &lhs, &vec![e0; rows.len()], tol);
    let ineq = if ctx.eoo_data {
        ineq
    } else {
        ineq.gated(false, "data not even-odd-odd, the gradient-dissipation bound may fail")
    };
    vec![id, ineq]
}

/// Warns when halving the sampling changes the dissipation integral noticeably.
fn cadence_note(rows: &[DiagnosticsReport]) -> String {
    if rows.len() < 5 {
        return String::new();
    }
    let fine = *running_integral(rows, |r| r.curl_sq).last().unwrap_or(&0.0);
    let coarse_rows: Vec<DiagnosticsReport> = rows
        .iter()
        .enumerate()
        .filter(|(k, _)| k % 2 == 0 || *k + 1 == rows.len())
        .map(|(_, r)| r.clone())
        .collect();
    let coarse = *running_integral(&coarse_rows, |r| r.curl_sq).last().unwrap_or(&0.0);
    if fine > 0.0 && (fine - coarse).abs() > 1e-2 * fine {
        format!("cadence too coarse: dissipation integral changes by {:.2e} under 2x subsampling", (fine - coarse).abs() / fine)
    } else {
        String::new()
    }
}

/// `sup|Γ(t)| ≤ sup|Γ₀|`.
pub fn gamma_max_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> AuditResult {
    let g0 = rows.first().map_or(0.0, |r| r.gamma_sup);
    let lhs: Vec<f64> = rows.iter().map(|r| r.gamma_sup).collect();
    AuditResult::inequality("gamma maximum principle", rows, &lhs, &vec![g0; rows.len()], ctx.tol2() * g0)
}

/// K/F/Ω energy estimate with factor 1/10 and the bound of its initial value by `‖∇v₀‖²`.
pub fn kfo_energy_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> Vec<AuditResult> {
    let tot = |r: &DiagnosticsReport| r.kfo_energy.iter().sum::<f64>();
    let x0 = rows.first().map_or(0.0, tot);
    let grads = running_integral(rows, |r| r.kfo_grad_sq.iter().sum());
    let lhs: Vec<f64> = rows.iter().zip(&grads).map(|(r, g)| tot(r) + 0.1 * g).collect();
    let met = ctx.gamma0_sup <= crate::solver::initial::GAMMA_THRESHOLD_KFO && ctx.eoo_data;
    let why = format!("sup|Gamma0| = {:.4e} vs 1/95, even-odd-odd data {}", ctx.gamma0_sup, ctx.eoo_data);
    let main = AuditResult::inequality("K/F/Omega energy (1/10)", rows, &lhs, &vec![x0; rows.len()], ctx.tol2() * x0)
        .gated(met, &why);
    // |ω|² ≤ 2|∇v|² and ρ sinφ ≥ cos α/m give ∫(K² + F² + Ω²) ≤ (2m²/cos²α)‖∇v₀‖².
    let cst = 2.0 * (ctx.m as f64).powi(2) / ctx.alpha.cos().powi(2);
    let first: Vec<DiagnosticsReport> = rows.iter().take(1).cloned().collect();
    let init = AuditResult::inequality(
        "K/F/Omega initial bound",
        &first,
        &[x0],
        &[cst * ctx.v0_grad_sq],
        ctx.tol2() * cst * ctx.v0_grad_sq,
    )
    .with_note(format!("C = 2m^2/cos^2(alpha) = {cst:.4}"));
    vec![main, init]
}

/// Ratios of consecutive per-window maxima of `sup|v|`, `sup|ω_θ|` and `‖v/ρ‖_{L⁶}`.
pub fn bound_monitor(rows: &[DiagnosticsReport], ctx: &AuditContext) -> Vec<AuditResult> {
    let monitors: [(&str, fn(&DiagnosticsReport) -> f64); 3] = [
        ("sup |v| growth", |r| r.v_sup),
        ("sup |omega_theta| growth", |r| r.omega_theta_sup),
        ("L6 norm of v/rho growth", |r| r.v_over_rho_l6),
    ];
    let nwin = rows.iter().map(|r| r.window + 1).max().unwrap_or(0);
    monitors
        .iter()
        .map(|(name, f)| {
            let mut maxima = vec![0.0f64; nwin];
            for r in rows {
                maxima[r.window] = maxima[r.window].max(f(r));
            }
            let mut lhs = vec![];
            let mut times = vec![];
            for k in 1..nwin {
                let ratio = if maxima[k - 1] > 0.0 { maxima[k] / maxima[k - 1] } else if maxima[k] > 0.0 { f64::INFINITY } else { 0.0 };
                lhs.push(ratio);
                times.push(rows.iter().find(|r| r.window == k).cloned().unwrap_or_else(|| rows[0].clone()));
            }
            AuditResult::inequality(name, &times, &lhs, &vec![ctx.growth; lhs.len()], 0.0)
        })
        .collect()
}

/// Strong-form momentum residual, divergence, pressure consistency and the weak identity cross-check.
pub fn residual_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> Vec<AuditResult> {
    let res: Vec<f64> = rows.iter().map(|r| r.momentum_residual.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let scale: Vec<f64> = rows
        .iter()
        .map(|r| ctx.c * (ctx.h * ctx.h * r.momentum_scale + ctx.dt * (r.momentum_scale + r.d2vdt2_l2)))
        .collect();
    let warnings = rows.iter().filter(|r| r.pressure_warning).count();
    // First and last rows only have one-sided time differences; like the spatial
    // margin, the audit covers the interior rows.
    let inner = if rows.len() > 2 { 1..rows.len() - 1 } else { 0..rows.len() };
    let momentum = AuditResult::inequality("momentum residual", &rows[inner.clone()], &res[inner.clone()], &scale[inner], 0.0)
        .with_note(format!("time-interior rows; rhs is c(h^2 M + dt (M + |d2v/dt2|)), M = |Lap v|+|v.grad v|+|dv/dt|; {warnings} pressure-path warnings"));

    // E(t) − E(0) = 2∫v·∂ₜv, and the weak identity moves the energy-identity slack
    // onto ∫∫(v·∂ₜv + (v·∇v)·v + |∇×v|²).
    let e0 = rows.first().map_or(0.0, |r| r.energy);
    let curl = running_integral(rows, |r| r.curl_sq);
    let weak = running_integral(rows, |r| r.weak_time + r.weak_convection + r.curl_sq);
    let lhs: Vec<f64> = rows.iter().zip(&curl).map(|(r, c)| r.energy + 2.0 * c - e0).collect();
    let rhs: Vec<f64> = weak.iter().map(|w| 2.0 * w).collect();
    let cross = AuditResult::identity("weak identity vs energy identity", rows, &lhs, &rhs, ctx.tol2() * e0.max(f64::MIN_POSITIVE));

    let vmax = rows.iter().map(|r| r.energy.sqrt()).fold(0.0, f64::max);
    let div: Vec<f64> = rows.iter().map(|r| r.divergence_l2).collect();
    let grad_max = rows.iter().map(|r| r.grad_sq.sqrt()).fold(0.0, f64::max);
    let divergence = AuditResult::inequality(
        "divergence",
        rows,
        &div,
        &vec![ctx.tol2() * (vmax + grad_max); rows.len()],
        0.0,
    );
    vec![momentum, cross, divergence]
}

/// `curl(b)_θ = ρ sinφ Ω̃` along the run.
pub fn fixed_point_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> AuditResult {
    // Truncation of the Biot-Savart recovery scales with derivatives of the vorticity.
    let scale = rows.iter().map(|r| r.omega_theta_l2 + r.transfer_norms[1]).fold(0.0, f64::max);
    let lhs: Vec<f64> = rows.iter().map(|r| r.fixed_point_defect).collect();
    AuditResult::inequality("fixed-point consistency", rows, &lhs, &vec![ctx.tol2() * scale; rows.len()], 0.0)
}

/// Even-odd-odd residual below ten times the truncation estimate `(h² + Δt)‖v‖`.
pub fn symmetry_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> AuditResult {
    let lhs: Vec<f64> = rows.iter().map(|r| r.eoo_residual).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| 10.0 * (ctx.h * ctx.h + ctx.dt) * r.energy.sqrt()).collect();
    AuditResult::inequality("even-odd-odd residual", rows, &lhs, &rhs, 0.0)
        .gated(ctx.eoo_data, "initial data not even-odd-odd")
}

/// `‖∇v‖² ≤ 3‖∇×v‖²` at every row; slack allowance `c·h·3‖∇×v‖²`.
pub fn curl_grad_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> AuditResult {
    let lhs: Vec<f64> = rows.iter().map(|r| r.grad_sq).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| 3.0 * r.curl_sq).collect();
    let worst = rhs.iter().cloned().fold(0.0, f64::max);
    AuditResult::inequality("curl controls gradient", rows, &lhs, &rhs, ctx.c * ctx.h * worst)
        .gated(ctx.eoo_data && ctx.alpha <= std::f64::consts::FRAC_PI_6 * (1.0 + 1e-12), "needs even-odd-odd data and alpha <= pi/6")
}

/// The five transfer estimates at every row.
pub fn transfer_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> Vec<AuditResult> {
    TRANSFER_CONSTANTS
        .iter()
        .enumerate()
        .map(|(k, (name, c, idx))| {
            let lhs: Vec<f64> = rows.iter().map(|r| r.transfer_lhs[k]).collect();
            let rhs: Vec<f64> = rows.iter().map(|r| c * r.transfer_norms[*idx]).collect();
            let scale = rhs.iter().chain(&lhs).cloned().fold(0.0, f64::max);
            AuditResult::inequality(name, rows, &lhs, &rhs, ctx.tol1() * scale).gated(ctx.eoo_data, "initial data not even-odd-odd")
        })
        .collect()
}

/// The three K, F, Ω energy identities integrated in time; mismatch allowance `c·(h + Δt)·scale`.
pub fn kfo_identity_audit(rows: &[DiagnosticsReport], ctx: &AuditContext) -> Vec<AuditResult> {
    ["K energy identity", "F energy identity", "Omega energy identity"]
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let x0 = rows.first().map_or(0.0, |r| r.kfo_energy[k]);
            let grad = running_integral(rows, |r| r.kfo_grad_sq[k]);
            let rhs = running_integral(rows, |r| r.kfo_identity_rhs[k]);
            let abs_rhs = running_integral(rows, |r| r.kfo_identity_rhs[k].abs());
            let lhs: Vec<f64> = rows.iter().zip(&grad).map(|(r, g)| 0.5 * r.kfo_energy[k] - 0.5 * x0 + g).collect();
            let scale = 0.5 * x0 + grad.last().copied().unwrap_or(0.0) + abs_rhs.last().copied().unwrap_or(0.0);
            AuditResult::identity(name, rows, &lhs, &rhs, ctx.tol1() * scale).gated(ctx.eoo_data, "initial data not even-odd-odd")
        })
        .collect()
}

/// Which audits count towards the run verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditSelection {
    pub energy: bool,
    pub gamma_max: bool,
    pub kfo: bool,
    pub bounds: bool,
    pub residual: bool,
    pub fixed_point: bool,
    pub symmetry: bool,
    pub curl_grad: bool,
    pub transfer: bool,
    pub kfo_identities: bool,
}

impl Default for AuditSelection {
    fn default() -> Self {
        Self {
            energy: true,
            gamma_max: true,
            kfo: true,
            bounds: true,
            residual: true,
            fixed_point: true,
            symmetry: true,
            curl_grad: true,
            transfer: true,
            kfo_identities: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditSummary {
    pub context: AuditContext,
    pub audits: Vec<AuditResult>,
    pub picard_contraction: AuditResult,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Picard ratios below one in every window.
pub fn picard_audit(ctx: &AuditContext) -> AuditResult {
    let lhs: Vec<f64> = ctx.window_ratios.iter().map(|r| r.unwrap_or(0.0)).collect();
    let worst = lhs.iter().cloned().fold(0.0, f64::max);
    AuditResult {
        name: "Picard contraction".into(),
        hypothesis_met: true,
        pass: Some(worst < 1.0),
        lhs: worst,
        rhs: 1.0,
        slack: 1.0 - worst,
        tolerance: 0.0,
        worst_time: 0.0,
        note: format!("{} windows", lhs.len()),
    }
}

/// Runs the selected audits. The verdict fails on any audit with `pass == Some(false)`.
pub fn audit(rows: &[DiagnosticsReport], ctx: &AuditContext, sel: AuditSelection) -> AuditSummary {
    let mut audits = vec![];
    if sel.energy {
        audits.extend(energy_audit(rows, ctx));
    }
    if sel.gamma_max {
        audits.push(gamma_max_audit(rows, ctx));
    }
    if sel.kfo {
        audits.extend(kfo_energy_audit(rows, ctx));
    }
    if sel.bounds {
        audits.extend(bound_monitor(rows, ctx));
    }
    if sel.residual {
        audits.extend(residual_audit(rows, ctx));
    }
    if sel.fixed_point {
        audits.push(fixed_point_audit(rows, ctx));
    }
    if sel.symmetry {
        audits.push(symmetry_audit(rows, ctx));
    }
    if sel.curl_grad {
        audits.push(curl_grad_audit(rows, ctx));
    }
    if sel.transfer {
        audits.extend(transfer_audit(rows, ctx));
    }
    if sel.kfo_identities {
        audits.extend(kfo_identity_audit(rows, ctx));
    }
    let picard = picard_audit(ctx);
    let mut warnings: Vec<String> = audits
        .iter()
        .filter(|a| !a.note.is_empty() && (a.pass != Some(true) || a.note.contains("cadence")))
        .map(|a| format!("{}: {}", a.name, a.note))
        .collect();
    if rows.iter().any(|r| !row_is_finite(r)) {
        warnings.push("non-finite entries in the diagnostics rows".into());
    }
    let pass = picard.pass == Some(true)
        && audits.iter().all(|a| a.pass != Some(false))
        && rows.iter().all(row_is_finite);
    AuditSummary { context: ctx.clone(), audits, picard_contraction: picard, pass, warnings }
}

fn row_is_finite(r: &DiagnosticsReport) -> bool {
    [r.energy, r.curl_sq, r.grad_sq, r.gamma_sup, r.v_sup, r.omega_theta_sup, r.v_over_rho_l6]
        .iter()
        .chain(&r.kfo_energy)
        .chain(&r.kfo_grad_sq)
        .chain(&r.momentum_residual)
        .all(|x| x.is_finite())
}

/// One JSON object per row.
pub fn write_jsonl(mut w: impl Write, rows: &[DiagnosticsReport]) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_jsonl(text: &str) -> Result<Vec<DiagnosticsReport>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// Time series for plotting.
pub fn write_csv(w: impl Write, rows: &[DiagnosticsReport]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "t",
        "window",
        "energy",
        "curl_dissipation",
        "grad_dissipation",
        "gamma_sup",
        "v_sup",
        "omega_theta_sup",
        "v_over_rho_l6",
        "k_energy",
        "f_energy",
        "omega_energy",
        "eoo_residual",
        "momentum_residual",
        "laplacian_l2",
        "dvdt_l2",
    ])?;
    for r in rows {
        let res = r.momentum_residual.iter().map(|x| x * x).sum::<f64>().sqrt();
        let vals = [
            r.t,
            r.window as f64,
            r.energy,
            r.curl_dissipation,
            r.grad_dissipation,
            r.gamma_sup,
            r.v_sup,
            r.omega_theta_sup,
            r.v_over_rho_l6,
            r.kfo_energy[0],
            r.kfo_energy[1],
            r.kfo_energy[2],
            r.eoo_residual,
            res,
            r.laplacian_l2,
            r.dvdt_l2,
        ];
        out.write_record(vals.iter().map(|x| format!("{x:.16e}")))?;
    }
    out.flush()?;
    Ok(())
}
