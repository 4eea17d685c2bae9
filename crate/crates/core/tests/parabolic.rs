use axicone::field::{ScalarField, VectorField};
use axicone::geometry::MeridianDomain;
use axicone::grid::MeridianGrid;
use axicone::norms::l2;
use axicone::ops::d_phi;
use axicone::parabolic::{
    gamma_operator, omega_operator, omega_theta_residual, vtheta_from_gamma, GammaStepper, OmegaStepper, Scheme,
    StepError, StepperConfig,
};
use std::f64::consts::PI;
use std::sync::Arc;

const ALPHA: f64 = PI / 6.0;

fn grid(n: usize) -> Arc<MeridianGrid<f64>> {
    MeridianGrid::new(MeridianDomain::new(ALPHA, 2).unwrap(), n, n).unwrap().shared()
}

fn bump(g: &Arc<MeridianGrid<f64>>) -> ScalarField<f64> {
    ScalarField::from_fn(g, |r, p| (-40.0 * ((r - 0.8).powi(2) + (p - 1.5).powi(2))).exp())
}

#[test]
fn constants_are_steady() {
    let g = grid(17);
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let st = GammaStepper::new(&g, StepperConfig::new(1e-2, scheme)).unwrap();
        let c = ScalarField::constant(&g, 0.37);
        let out = st.step(&c, &VectorField::zeros(&g)).unwrap();
        assert!(out.sub(&c).max_abs() < 1e-14);
    }
}

#[test]
fn backward_euler_obeys_max_principle() {
    let g = grid(25);
    let st = GammaStepper::new(&g, StepperConfig::new(5e-3, Scheme::BackwardEuler)).unwrap();
    let mut u = bump(&g).map(|x| x - 0.2);
    let (lo, hi) = (u.min(), u.max());
    let mut prev = u.max_abs();
    for _ in 0..40 {
        u = st.step(&u, &VectorField::zeros(&g)).unwrap();
        assert!(u.min() >= lo - 1e-14 && u.max() <= hi + 1e-14);
        assert!(u.max_abs() <= prev + 1e-14);
        prev = u.max_abs();
    }
}

#[test]
fn gamma_manufactured_solution_converges() {
    // Γ = e^{−t} cos(4π(ρ − ½)) cos(k(φ − π/2)) with a forcing that makes it exact.
    let k = PI / ALPHA;
    let q = 4.0 * PI;
    let exact = |t: f64, r: f64, p: f64| (-t).exp() * (q * (r - 0.5)).cos() * (k * (p - PI / 2.0)).cos();
    let forcing = |t: f64, r: f64, p: f64| {
        let s = p - PI / 2.0;
        let a = (q * (r - 0.5)).cos();
        let (b, db, ddb) = ((k * s).cos(), -k * (k * s).sin(), -k * k * (k * s).cos());
        let lap = -q * q * a * b + a / (r * r) * (ddb - db / p.tan());
        (-t).exp() * (-(a * b) - lap)
    };
    let t_end = 0.02;
    let mut errs = vec![];
    for n in [9, 17, 33] {
        let g = grid(n);
        let steps = (n - 1) * (n - 1) / 4;
        let dt = t_end / steps as f64;
        let st = GammaStepper::new(&g, StepperConfig::new(dt, Scheme::BackwardEuler)).unwrap();
        let mut u = ScalarField::from_fn(&g, |r, p| exact(0.0, r, p));
        for s in 1..=steps {
            let t = s as f64 * dt;
            let src = ScalarField::from_fn(&g, |r, p| -forcing(t, r, p));
            u = st.step_explicit(&u, &src).unwrap();
        }
        let want = ScalarField::from_fn(&g, |r, p| exact(t_end, r, p));
        errs.push(u.sub(&want).max_abs());
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    assert!(ratios.iter().all(|&r| r > 3.3), "{errs:?}");
}

#[test]
fn omega_zero_stays_zero() {
    let g = grid(17);
    let st = OmegaStepper::new(&g, StepperConfig::new(1e-3, Scheme::CrankNicolson)).unwrap();
    let z = ScalarField::zeros(&g);
    let out = st.step(&z, &VectorField::zeros(&g), &z).unwrap();
    assert_eq!(out.max_abs(), 0.0);
}

#[test]
fn omega_eigenmode_decays_at_its_rate() {
    let g = grid(13);
    let op = omega_operator(&g);
    let lu = op.factor().unwrap();
    // Inverse iteration for the eigenvalue of L closest to zero.
    let mut u = bump(&g).map_indexed(|i, j, x| if g.label(i, j).is_boundary() { 0.0 } else { x });
    for _ in 0..400 {
        let (w, _) = lu.solve(&u).unwrap();
        u = w.scale(1.0 / w.max_abs());
    }
    let lu_ = op.apply(&u);
    let (i, j) = (6, 6);
    let lambda = lu_.at(i, j) / u.at(i, j);
    assert!(lambda < 0.0);
    assert!(lu_.sub(&u.scale(lambda)).max_abs() < 1e-9 * lambda.abs());
    let dt = 1e-3;
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let st = OmegaStepper::new(&g, StepperConfig::new(dt, scheme)).unwrap();
        let z = ScalarField::zeros(&g);
        let out = st.step(&u, &VectorField::zeros(&g), &z).unwrap();
        let th = match scheme {
            Scheme::BackwardEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        };
        let amp = (1.0 + (1.0 - th) * dt * lambda) / (1.0 - th * dt * lambda);
        assert!(out.sub(&u.scale(amp)).max_abs() < 1e-9);
        assert!(l2(&out) <= l2(&u));
    }
}

#[test]
fn omega_step_preserves_odd_symmetry() {
    let g = grid(21);
    let k = PI / ALPHA;
    let om = ScalarField::from_fn(&g, |r, p| (2.0 * PI * (r - 0.5)).sin() * (k * (p - PI / 2.0)).sin());
    let vt = ScalarField::from_fn(&g, |r, p| r * r * (0.5 * k * (p - PI / 2.0)).sin());
    let b = VectorField::from_fn(&g, |r, p| {
        let s = p - PI / 2.0;
        [0.1 * r * (k * s).cos(), 0.1 * r * (k * s).sin(), 0.0]
    });
    let st = OmegaStepper::new(&g, StepperConfig::new(1e-3, Scheme::CrankNicolson)).unwrap();
    let out = st.step(&om, &b, &vt).unwrap();
    assert!(out.add(&out.reflect()).max_abs() < 1e-10);
    assert!(out.sub(&om).max_abs() > 1e-4);
}

#[test]
fn cfl_violation_is_reported() {
    let g = grid(17);
    let st = GammaStepper::new(&g, StepperConfig::new(0.1, Scheme::BackwardEuler)).unwrap();
    let b = VectorField::from_fn(&g, |_, _| [1.0, 0.0, 0.0]);
    assert!(matches!(st.step(&ScalarField::zeros(&g), &b), Err(StepError::Cfl { .. })));
    assert!(GammaStepper::new(&g, StepperConfig::new(0.0, Scheme::BackwardEuler)).is_err());
}

#[test]
fn gamma_operator_conserves_mass_weighting() {
    // Neumann rows sum to zero, so constants lie in the kernel.
    let g = grid(11);
    let out = gamma_operator(&g).apply(&ScalarField::constant(&g, 2.0));
    assert!(out.max_abs() < 1e-12);
}

#[test]
fn vtheta_robin_residual_is_second_order() {
    let mut errs = vec![];
    for n in [17, 33, 65] {
        let g = grid(n);
        let gam = ScalarField::from_fn(&g, |r, p| r * r * (3.0 * (p - PI / 2.0)).cos().powi(2) + 1.0);
        let vt = vtheta_from_gamma(&gam);
        let dp = d_phi(&vt);
        let worst = (0..g.n_rho())
            .flat_map(|i| [0, g.n_phi() - 1].map(|j| (i, j)))
            .map(|(i, j)| (dp.at(i, j) + g.cot(j) * vt.at(i, j)).abs())
            .fold(0.0f64, f64::max);
        errs.push(worst);
    }
    assert!(errs.windows(2).all(|w| w[0] / w[1] > 3.7), "{errs:?}");
    let g = grid(9);
    let one = vtheta_from_gamma(&ScalarField::constant(&g, 1.0));
    let want = ScalarField::from_fn(&g, |r, p| 1.0 / (r * p.sin()));
    assert!(one.sub(&want).max_abs() < 1e-15);
}

#[test]
fn swirl_satisfies_omega_theta_equation() {
    let mut errs = vec![];
    for n in [17, 33, 65] {
        let g = grid(n);
        let v = VectorField::from_fn(&g, |r, p| [0.0, 0.0, 1.0 / (r * p.sin())]);
        let z = ScalarField::zeros(&g);
        errs.push(omega_theta_residual(&v, &z, &z).max_abs());
    }
    assert!(errs.iter().all(|&e| e < 1e-3), "{errs:?}");
    assert!(errs[1] < errs[0] && errs[2] < errs[1] || errs[2] < 1e-10, "{errs:?}");
    let g = grid(9);
    let z = ScalarField::zeros(&g);
    assert_eq!(omega_theta_residual(&VectorField::zeros(&g), &z, &z).max_abs(), 0.0);
}
