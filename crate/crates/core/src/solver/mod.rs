//! The fixed-point map `b ↦ b̃` (evolve `Γ`, then `Ω̃`, then recover `b̃` by Biot-Savart)
//! and the windowed time march built on it.

pub mod initial;

use crate::config::de_angle;
use crate::diagnostics::{DiagnosticsReport, RowBuilder};
use crate::elliptic::{BiotSavart, EllipticError};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{GeometryError, MeridianDomain};
use crate::grid::{GridError, MeridianGrid};
use crate::io::SnapshotError;
use crate::norms::integrate;
use crate::ops::{convect, curl, grad_vector};
use crate::parabolic::{cfl_number, r1, vtheta_from_gamma, GammaStepper, OmegaStepper, Scheme, StepError, StepperConfig};
use crate::{Grid, Scalar, Vector};
use initial::{admissibility_check, example_initial_data, lambda2_for_gamma_sup, swirl_velocity, Admissibility};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Stream-function example; give either `lambda2` or the target `gamma_sup`.
    Example {
        lambda1: f64,
        #[serde(default)]
        lambda2: Option<f64>,
        #[serde(default)]
        gamma_sup: Option<f64>,
    },
    /// `v = (c/(ρ sinφ)) e_θ`, so `Γ ≡ c`.
    Swirl { amplitude: f64 },
    Zero,
    /// Velocity snapshot CSV on the configured grid.
    Snapshot { path: PathBuf },
}

fn default_window() -> f64 {
    0.05
}
fn default_min_window() -> f64 {
    1e-3
}
fn default_picard_tol() -> f64 {
    1e-10
}
fn default_picard_max_iter() -> usize {
    50
}
fn default_cadence() -> usize {
    1
}
fn default_snapshot_every() -> usize {
    50
}
fn default_startup_steps() -> usize {
    2
}
fn default_cfl_safety() -> f64 {
    0.5
}
fn default_scheme() -> Scheme {
    Scheme::CrankNicolson
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(deserialize_with = "de_angle")]
    pub alpha: f64,
    pub m: u32,
    pub n_rho: usize,
    pub n_phi: usize,
    pub t_final: f64,
    pub dt: f64,
    /// Picard window length `T_w`.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Floor for the window after repeated halving.
    #[serde(default = "default_min_window")]
    pub min_window: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Absolute stopping level for the window `E`-distance of consecutive iterates.
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max_iter")]
    pub picard_max_iter: usize,
    pub initial: InitialData,
    /// Re-project onto the even-odd-odd subspace after every window.
    #[serde(default)]
    pub enforce_symmetry: bool,
    /// Steps between diagnostic rows.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    /// Diagnostic rows between stored snapshots.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    /// Backward Euler steps taken before Crank-Nicolson starts, to damp stiff modes of the initial data.
    #[serde(default = "default_startup_steps")]
    pub startup_steps: usize,
}

impl SimulationConfig {
    pub fn domain(&self) -> Result<MeridianDomain<f64>, SolverError> {
        Ok(MeridianDomain::for_solver(self.alpha, self.m)?)
    }

    pub fn grid(&self) -> Result<Arc<Grid>, SolverError> {
        let g = MeridianGrid::new(self.domain()?, self.n_rho, self.n_phi)?;
        g.require_symmetric()?;
        Ok(g.shared())
    }

    fn steps(&self, t: f64) -> Result<usize, SolverError> {
        let n = (t / self.dt).round();
        if n < 1.0 || (n * self.dt - t).abs() > 1e-9 * t.max(self.dt) {
            return Err(SolverError::Config(format!("{t} is not a positive multiple of dt = {}", self.dt)));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.domain()?;
        let bad = |msg: String| Err(SolverError::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iter == 0 || self.cadence == 0 || self.snapshot_every == 0 {
            return bad("picard_max_iter, cadence and snapshot_every must be at least 1".into());
        }
        if !(self.window > 0.0 && self.window <= self.t_final * (1.0 + 1e-12)) {
            return bad(format!("window {} must lie in (0, t_final = {}]", self.window, self.t_final));
        }
        if !(self.min_window > 0.0 && self.min_window <= self.window) {
            return bad(format!("min_window {} must lie in (0, window]", self.min_window));
        }
        if !(self.cfl_safety > 0.0) {
            return bad("cfl_safety must be positive".into());
        }
        if let InitialData::Example { lambda2, gamma_sup, .. } = &self.initial {
            if lambda2.is_some() == gamma_sup.is_some() {
                return bad("example data needs exactly one of lambda2 and gamma_sup".into());
            }
        }
        self.steps(self.t_final)?;
        self.grid()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("Picard iteration did not converge in {iterations} iterations over {steps} steps (distances {distances:?}, ratios {ratios:?}); shorten the window")]
    NonConvergence { steps: usize, iterations: usize, distances: Vec<f64>, ratios: Vec<f64> },
    #[error("window starting at t = {t0} failed down to the minimum length; contraction ratios per attempt: {attempts:?}")]
    WindowFailed { t0: f64, attempts: Vec<Vec<f64>> },
}

/// Primary unknowns at one time level. Derived fields are recomputed on demand.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub t: f64,
    pub gamma: Scalar,
    pub omega: Scalar,
    /// Meridional velocity `(v_ρ, v_φ)`; its θ-component is zero.
    pub b: Vector,
}

impl SimulationState {
    pub fn grid(&self) -> &Arc<Grid> {
        self.gamma.grid()
    }

    pub fn vtheta(&self) -> Scalar {
        vtheta_from_gamma(&self.gamma)
    }

    pub fn velocity(&self) -> Vector {
        VectorField { rho: self.b.rho.clone(), phi: self.b.phi.clone(), theta: self.vtheta() }
    }

    /// State at time `t` from a full velocity; `Ω̃` comes from its discrete curl.
    pub fn from_velocity(t: f64, v: &Vector) -> Self {
        let g = v.grid().clone();
        let w = curl(v);
        let omega = w.theta.map_indexed(|i, j, x| {
            if g.label(i, j).is_boundary() {
                0.0
            } else {
                x / (g.rho(i) * g.sin(j))
            }
        });
        let gamma = v.theta.map_indexed(|i, j, x| g.rho(i) * g.sin(j) * x);
        Self { t, gamma, omega, b: VectorField::meridional(v.rho.clone(), v.phi.clone()) }
    }

    /// Even part of `v_ρ`, odd parts of `v_φ`, `Γ`, `Ω̃`.
    pub fn project_eoo(&self) -> Self {
        let even = |f: &Scalar| f.zip_with(&f.reflect(), |a, b| 0.5 * (a + b));
        let odd = |f: &Scalar| f.zip_with(&f.reflect(), |a, b| 0.5 * (a - b));
        Self {
            t: self.t,
            gamma: odd(&self.gamma),
            omega: odd(&self.omega),
            b: VectorField::meridional(even(&self.b.rho), odd(&self.b.phi)),
        }
    }
}

/// Velocity for the configured initial data.
pub fn initial_velocity(cfg: &SimulationConfig, grid: &Arc<Grid>) -> Result<Vector, SolverError> {
    Ok(match &cfg.initial {
        InitialData::Example { lambda1, lambda2, gamma_sup } => {
            let l2 = match (lambda2, gamma_sup) {
                (Some(l), _) => *l,
                (None, Some(s)) => lambda2_for_gamma_sup(*s, grid),
                (None, None) => return Err(SolverError::Config("example data needs lambda2 or gamma_sup".into())),
            };
            example_initial_data(*lambda1, l2, grid)
        }
        InitialData::Swirl { amplitude } => swirl_velocity(grid, *amplitude),
        InitialData::Zero => VectorField::zeros(grid),
        InitialData::Snapshot { path } => crate::io::read_vector_csv(path, grid)?,
    })
}

/// Time levels produced by one application of the map over a window.
#[derive(Debug, Clone)]
pub struct WindowLevels {
    pub gamma: Vec<Scalar>,
    pub omega: Vec<Scalar>,
    pub b: Vec<Vector>,
}

/// Convergence record of one window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowRecord {
    pub index: usize,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub iterations: usize,
    pub halvings: usize,
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl WindowRecord {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

/// Converged window: the levels and the iteration history.
#[derive(Debug, Clone)]
pub struct WindowSolution {
    pub levels: WindowLevels,
    pub iterations: usize,
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// Grid-bound machinery shared by all windows.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimulationConfig,
    grid: Arc<Grid>,
    biot: BiotSavart<f64>,
    gamma_st: GammaStepper<f64>,
    omega_st: OmegaStepper<f64>,
    /// Backward Euler pair for the startup steps.
    gamma_be: GammaStepper<f64>,
    omega_be: OmegaStepper<f64>,
}

impl Simulation {
    pub fn new(cfg: SimulationConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let sc = StepperConfig { dt: cfg.dt, scheme: cfg.scheme, cfl_safety: cfg.cfl_safety };
        let be = StepperConfig { scheme: Scheme::BackwardEuler, ..sc };
        Ok(Self {
            biot: BiotSavart::new(&grid)?,
            gamma_st: GammaStepper::new(&grid, sc)?,
            omega_st: OmegaStepper::new(&grid, sc)?,
            gamma_be: GammaStepper::new(&grid, be)?,
            omega_be: OmegaStepper::new(&grid, be)?,
            grid,
            cfg,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn initial_state(&self) -> Result<(SimulationState, Admissibility), SolverError> {
        let v = initial_velocity(&self.cfg, &self.grid)?;
        v.check_finite()?;
        Ok((SimulationState::from_velocity(0.0, &v), admissibility_check(&v, 10.0)))
    }

    /// Scheme of global step `k → k+1`.
    pub fn scheme_at(&self, k: usize) -> Scheme {
        if k < self.cfg.startup_steps {
            Scheme::BackwardEuler
        } else {
            self.cfg.scheme
        }
    }

    /// Drift used on step `n → n+1`.
    fn drift(b: &[Vector], n: usize, scheme: Scheme) -> Vector {
        match scheme {
            Scheme::BackwardEuler => b[n + 1].clone(),
            Scheme::CrankNicolson => b[n].add(&b[n + 1]).scale(0.5),
        }
    }

    /// One application of the map: `b` holds the drift at every time level of the window.
    pub fn apply_l(&self, state0: &SimulationState, b: &[Vector]) -> Result<WindowLevels, SolverError> {
        let n = b.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| SolverError::Config("window needs at least one step".into()))?;
        let first = (state0.t / self.cfg.dt).round() as usize;
        let schemes: Vec<Scheme> = (0..n).map(|k| self.scheme_at(first + k)).collect();
        let mut gamma = Vec::with_capacity(n + 1);
        let mut omega = Vec::with_capacity(n + 1);
        gamma.push(state0.gamma.clone());
        omega.push(state0.omega.clone());
        let drifts: Vec<Vector> = (0..n).map(|k| Self::drift(b, k, schemes[k])).collect();
        for d in &drifts {
            let cfl = cfl_number(d, self.cfg.dt);
            if cfl > self.cfg.cfl_safety {
                return Err(StepError::Cfl { cfl, limit: self.cfg.cfl_safety }.into());
            }
        }
        let steppers = |sch: Scheme| match sch {
            Scheme::BackwardEuler if self.cfg.scheme != sch => (&self.gamma_be, &self.omega_be),
            _ => (&self.gamma_st, &self.omega_st),
        };
        for (k, d) in drifts.iter().enumerate() {
            let next = steppers(schemes[k]).0.step_explicit(&gamma[k], &convect(d, &gamma[k]))?;
            gamma.push(next);
        }
        let mut r_prev = r1(&vtheta_from_gamma(&gamma[0]));
        for (k, d) in drifts.iter().enumerate() {
            let r_next = r1(&vtheta_from_gamma(&gamma[k + 1]));
            let theta: f64 = schemes[k].theta();
            let mut explicit = convect(d, &omega[k]);
            explicit.axpy(theta, &r_next);
            explicit.axpy(1.0 - theta, &r_prev);
            let next = steppers(schemes[k]).1.step_explicit(&omega[k], &explicit)?;
            omega.push(next);
            r_prev = r_next;
        }
        let mut bt = Vec::with_capacity(n + 1);
        bt.push(state0.b.clone());
        for om in &omega[1..] {
            bt.push(self.biot.assemble_b(om)?.0);
        }
        Ok(WindowLevels { gamma, omega, b: bt })
    }

    /// Discrete energy-space distance over a window:
    /// `(max_n ‖δbⁿ‖² + Σ trapezoid Δt ‖∇δbⁿ‖²)^{1/2}`.
    pub fn e_distance(&self, a: &[Vector], b: &[Vector]) -> f64 {
        let n = a.len();
        let mut sup = 0.0f64;
        let mut dis = 0.0;
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            let d = x.sub(y);
            sup = sup.max(integrate(&d.norm_sq()));
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            dis += w * self.cfg.dt * integrate(&grad_vector(&d).frobenius_sq());
        }
        (sup + dis).sqrt()
    }

    /// Iterates the map from the constant drift `b⁰ ≡ state₀.b` until the
    /// distance of consecutive iterates drops below the tolerance.
    pub fn picard_solve(&self, state0: &SimulationState, steps: usize) -> Result<WindowSolution, SolverError> {
        let mut b = vec![state0.b.clone(); steps + 1];
        let mut distances: Vec<f64> = vec![];
        let mut ratios = vec![];
        let fail = |distances: Vec<f64>, ratios: Vec<f64>| SolverError::NonConvergence {
            steps,
            iterations: distances.len(),
            distances,
            ratios,
        };
        for k in 1..=self.cfg.picard_max_iter {
            let levels = match self.apply_l(state0, &b) {
                Ok(l) => l,
                // A drift that breaks the CFL limit after the first pass is a diverging iterate.
                Err(SolverError::Step(StepError::Cfl { .. })) if k > 1 => return Err(fail(distances, ratios)),
                Err(e) => return Err(e),
            };
            let d = self.e_distance(&levels.b, &b);
            if let Some(&prev) = distances.last() {
                ratios.push(if prev > 0.0 { d / prev } else { 0.0 });
            }
            distances.push(d);
            if !d.is_finite() || d > 1e6 * distances[0].max(self.cfg.picard_tol) {
                return Err(fail(distances, ratios));
            }
            if d < self.cfg.picard_tol {
                return Ok(WindowSolution { levels, iterations: k, distances, ratios });
            }
            b = levels.b;
        }
        Err(fail(distances, ratios))
    }

    /// Chains windows to `t_final`.
    pub fn march(&self) -> Result<Trajectory, SolverError> {
        let cfg = &self.cfg;
        let (mut state, admissibility) = self.initial_state()?;
        let total = cfg.steps(cfg.t_final)?;
        let window_steps = cfg.steps(cfg.window).unwrap_or(1).max(1);
        let min_steps = ((cfg.min_window / cfg.dt).round() as usize).max(1);
        let mut traj = Trajectory {
            config: cfg.clone(),
            admissibility,
            gamma0_sup: state.gamma.max_abs(),
            windows: vec![],
            rows: vec![],
            snapshots: vec![],
        };
        let mut rows = RowBuilder::new(self.grid.clone(), cfg.dt * cfg.cadence as f64);
        let mut done = 0usize;
        let mut steps = window_steps;
        let emit = |s: &SimulationState, step: usize, window: usize, rows: &mut RowBuilder, traj: &mut Trajectory| {
            if step % cfg.cadence == 0 || step == total {
                let k = step / cfg.cadence;
                if k % cfg.snapshot_every == 0 || step == total {
                    traj.snapshots.push(Snapshot { step, state: s.clone() });
                }
                if let Some(r) = rows.push(s, window) {
                    traj.rows.push(r);
                }
            }
        };
        emit(&state, 0, 0, &mut rows, &mut traj);
        while done < total {
            let t0 = state.t;
            let mut attempts = vec![];
            let mut halvings = 0;
            let sol = loop {
                let n = steps.min(total - done);
                match self.picard_solve(&state, n) {
                    Ok(sol) => break sol,
                    Err(SolverError::NonConvergence { ratios, .. }) => {
                        attempts.push(ratios);
                        if steps / 2 < min_steps {
                            return Err(SolverError::WindowFailed { t0, attempts });
                        }
                        steps /= 2;
                        halvings += 1;
                    }
                    Err(e) => return Err(e),
                }
            };
            let n = sol.levels.b.len() - 1;
            let index = traj.windows.len();
            let WindowLevels { gamma, omega, b } = sol.levels;
            for (k, ((g, o), bb)) in gamma.into_iter().zip(omega).zip(b).enumerate().skip(1) {
                let s = SimulationState { t: (done + k) as f64 * cfg.dt, gamma: g, omega: o, b: bb };
                s.gamma.check_finite()?;
                s.omega.check_finite()?;
                let s = if k == n && cfg.enforce_symmetry { s.project_eoo() } else { s };
                emit(&s, done + k, index, &mut rows, &mut traj);
                if k == n {
                    state = s;
                }
            }
            done += n;
            traj.windows.push(WindowRecord {
                index,
                t0,
                t1: state.t,
                steps: n,
                iterations: sol.iterations,
                halvings,
                distances: sol.distances,
                ratios: sol.ratios,
            });
        }
        traj.rows.extend(rows.finish());
        crate::diagnostics::accumulate(&mut traj.rows);
        Ok(traj)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub state: SimulationState,
}

/// Output of a run: window records, one diagnostics row per cadence step, stored snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimulationConfig,
    pub admissibility: Admissibility,
    pub gamma0_sup: f64,
    pub windows: Vec<WindowRecord>,
    pub rows: Vec<DiagnosticsReport>,
    pub snapshots: Vec<Snapshot>,
}

/// Convenience wrapper: build the machinery and march.
pub fn march(cfg: &SimulationConfig) -> Result<Trajectory, SolverError> {
    Simulation::new(cfg.clone())?.march()
}

/// `Γ` from a meridional field sampled as a full velocity, for callers that only hold `v`.
pub fn gamma_of(v: &Vector) -> ScalarField<f64> {
    let g = v.grid().clone();
    v.theta.map_indexed(|i, j, x| g.rho(i) * g.sin(j) * x)
}
