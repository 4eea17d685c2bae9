//! IMEX time steppers for the swirl flux `Γ` and the rescaled azimuthal vorticity `Ω̃`.
//!
//! Diffusion (with its built-in first-order terms) is implicit; the drift
//! `b·∇` is explicit with centred differences.

use crate::elliptic::{BoundaryCondition, EdgeConditions, EllipticError, EllipticOperator, FactoredOperator};
use crate::field::{ScalarField, VectorField};
use crate::grid::MeridianGrid;
use crate::ops::{convect, curl, d_phi, d_rho, laplacian_scalar};
use crate::real::Real;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("advective CFL number {cfl:.3e} exceeds the safety factor {limit}")]
    Cfl { cfl: f64, limit: f64 },
    #[error(transparent)]
    Solve(#[from] EllipticError),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
}

impl Scheme {
    /// Implicitness weight.
    pub fn theta<T: Real>(self) -> T {
        match self {
            Scheme::BackwardEuler => T::one(),
            Scheme::CrankNicolson => T::lit(0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig<T> {
    pub dt: T,
    pub scheme: Scheme,
    pub cfl_safety: T,
}

impl<T: Real> StepperConfig<T> {
    pub fn new(dt: T, scheme: Scheme) -> Self {
        Self { dt, scheme, cfl_safety: T::lit(0.5) }
    }
}

/// `Δt · max(|v_ρ|/hρ, |v_φ|/(ρ hφ))`.
pub fn cfl_number<T: Real>(b: &VectorField<T>, dt: T) -> T {
    let g = b.grid();
    g.nodes().fold(T::zero(), |m, (i, j)| {
        let a = b.rho.at(i, j).abs() / g.h_rho();
        let c = b.phi.at(i, j).abs() / (g.rho(i) * g.h_phi());
        m.max(a.max(c))
    }) * dt
}

fn check_cfl<T: Real>(b: &VectorField<T>, cfg: &StepperConfig<T>) -> Result<(), StepError> {
    let cfl = cfl_number(b, cfg.dt);
    if cfl > cfg.cfl_safety {
        return Err(StepError::Cfl { cfl: cfl.as_f64(), limit: cfg.cfl_safety.as_f64() });
    }
    Ok(())
}

/// Shared implicit machinery: `u' = (I − θΔt L)⁻¹ [u + (1−θ)Δt L u − Δt (drift + forcing)]`.
#[derive(Debug, Clone)]
struct Implicit<T> {
    cfg: StepperConfig<T>,
    lu: FactoredOperator<T>,
}

impl<T: Real> Implicit<T> {
    fn new(op: EllipticOperator<T>, cfg: StepperConfig<T>) -> Result<Self, StepError> {
        if !(cfg.dt > T::zero()) {
            return Err(StepError::BadStep(cfg.dt.as_f64()));
        }
        let theta: T = cfg.scheme.theta();
        let lu = op.factor_shifted(T::one(), -theta * cfg.dt)?;
        Ok(Self { cfg, lu })
    }

    fn step(&self, u: &ScalarField<T>, explicit: &ScalarField<T>) -> Result<ScalarField<T>, StepError> {
        let theta: T = self.cfg.scheme.theta();
        let dt = self.cfg.dt;
        let mut rhs = u.clone();
        if theta < T::one() {
            rhs.axpy((T::one() - theta) * dt, &self.lu.operator().apply(u));
        }
        rhs.axpy(-dt, explicit);
        Ok(self.lu.solve(&rhs)?.0)
    }
}

/// Stepper for `∂ₜΓ = ∂ρ²Γ + ρ⁻²(∂φ² − cotφ ∂φ)Γ − b·∇Γ` with `∂ₙΓ = 0`.
#[derive(Debug, Clone)]
pub struct GammaStepper<T> {
    inner: Implicit<T>,
}

/// The `Γ` diffusion operator `∂ρ² + ρ⁻² sinφ ∂φ(sinφ⁻¹ ∂φ)` with homogeneous Neumann data.
pub fn gamma_operator<T: Real>(grid: &Arc<MeridianGrid<T>>) -> EllipticOperator<T> {
    EllipticOperator::new(
        grid,
        |_| T::one(),
        |_| T::one(),
        |p| T::one() / p.sin(),
        |p| T::one() / p.sin(),
        None,
        EdgeConditions::uniform(BoundaryCondition::Neumann(T::zero())),
    )
}

impl<T: Real> GammaStepper<T> {
    pub fn new(grid: &Arc<MeridianGrid<T>>, cfg: StepperConfig<T>) -> Result<Self, StepError> {
        Ok(Self { inner: Implicit::new(gamma_operator(grid), cfg)? })
    }

    pub fn config(&self) -> &StepperConfig<T> {
        &self.inner.cfg
    }

    /// One step with drift `b` frozen over the step.
    pub fn step(&self, gamma: &ScalarField<T>, b: &VectorField<T>) -> Result<ScalarField<T>, StepError> {
        check_cfl(b, &self.inner.cfg)?;
        self.step_explicit(gamma, &convect(b, gamma))
    }

    /// One step with a precomputed explicit term (drift minus any forcing).
    pub fn step_explicit(&self, gamma: &ScalarField<T>, explicit: &ScalarField<T>) -> Result<ScalarField<T>, StepError> {
        self.inner.step(gamma, explicit)
    }
}

/// `v_θ = Γ/(ρ sinφ)`.
pub fn vtheta_from_gamma<T: Real>(gamma: &ScalarField<T>) -> ScalarField<T> {
    let g = gamma.grid().clone();
    gamma.map_indexed(|i, j, x| x / (g.rho(i) * g.sin(j)))
}

/// `R₁ = (ρ² sinφ)⁻¹ (ρ⁻¹ ∂φ(v_θ²) − cotφ ∂ρ(v_θ²))`.
pub fn r1<T: Real>(vtheta: &ScalarField<T>) -> ScalarField<T> {
    let g = vtheta.grid().clone();
    let sq = vtheta.mul(vtheta);
    let (dr, dp) = (d_rho(&sq), d_phi(&sq));
    ScalarField::from_index_fn(&g, |i, j| {
        let (r, s) = (g.rho(i), g.sin(j));
        (dp.at(i, j) / r - g.cot(j) * dr.at(i, j)) / (r * r * s)
    })
}

/// The `Ω̃` diffusion operator `ρ⁻⁴∂ρ(ρ⁴∂ρ) + (ρ² sin³φ)⁻¹ ∂φ(sin³φ ∂φ)` with `Ω̃ = 0` on the boundary.
pub fn omega_operator<T: Real>(grid: &Arc<MeridianGrid<T>>) -> EllipticOperator<T> {
    EllipticOperator::new(
        grid,
        |r| r.powi(4),
        |r| r.powi(4),
        |p| p.sin().powi(3),
        |p| p.sin().powi(3),
        None,
        EdgeConditions::uniform(BoundaryCondition::Dirichlet(T::zero())),
    )
}

/// Stepper for `∂ₜΩ̃ = L Ω̃ − b·∇Ω̃ − R₁`.
#[derive(Debug, Clone)]
pub struct OmegaStepper<T> {
    inner: Implicit<T>,
}

impl<T: Real> OmegaStepper<T> {
    pub fn new(grid: &Arc<MeridianGrid<T>>, cfg: StepperConfig<T>) -> Result<Self, StepError> {
        Ok(Self { inner: Implicit::new(omega_operator(grid), cfg)? })
    }

    pub fn config(&self) -> &StepperConfig<T> {
        &self.inner.cfg
    }

    /// One step with drift `b` and swirl `v_θ` frozen over the step.
    pub fn step(
        &self,
        omega: &ScalarField<T>,
        b: &VectorField<T>,
        vtheta: &ScalarField<T>,
    ) -> Result<ScalarField<T>, StepError> {
        check_cfl(b, &self.inner.cfg)?;
        let explicit = convect(b, omega).add(&r1(vtheta));
        self.inner.step(omega, &explicit)
    }

    /// One step with a precomputed explicit term `b·∇Ω̃ + R₁`.
    pub fn step_explicit(&self, omega: &ScalarField<T>, explicit: &ScalarField<T>) -> Result<ScalarField<T>, StepError> {
        self.inner.step(omega, explicit)
    }
}

/// Residual of the `ω_θ` equation with `ω_θ = ρ sinφ Ω̃`:
///
/// `(Δ − 1/(ρ² sin²φ))ω_θ − b·∇ω_θ + (v_ρ + cotφ v_φ)ω_θ/ρ − 2v_θ(K + cotφ F) − ∂ₜω_θ`.
pub fn omega_theta_residual<T: Real>(
    v: &VectorField<T>,
    omega: &ScalarField<T>,
    domega_dt: &ScalarField<T>,
) -> ScalarField<T> {
    let g = v.grid().clone();
    let rs = |i: usize, j: usize| g.rho(i) * g.sin(j);
    let wt = omega.map_indexed(|i, j, x| rs(i, j) * x);
    let wt_t = domega_dt.map_indexed(|i, j, x| rs(i, j) * x);
    let b = VectorField::meridional(v.rho.clone(), v.phi.clone());
    let lap = laplacian_scalar(&wt);
    let adv = convect(&b, &wt);
    let w = curl(v);
    ScalarField::from_index_fn(&g, |i, j| {
        let (r, s, c) = (g.rho(i), g.sin(j), g.cot(j));
        let x = wt.at(i, j);
        let k = w.rho.at(i, j) / r;
        let f = w.phi.at(i, j) / r;
        lap.at(i, j) - x / (r * r * s * s) - adv.at(i, j) + (v.rho.at(i, j) + c * v.phi.at(i, j)) * x / r
            - T::lit(2.0) * v.theta.at(i, j) * (k + c * f)
            - wt_t.at(i, j)
    })
}
