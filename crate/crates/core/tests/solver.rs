use axicone::config::from_toml_str;
use axicone::diagnostics::write_jsonl;
use axicone::io::{read_vector_csv, write_vector_csv};
use axicone::parabolic::Scheme;
use axicone::solver::initial::{admissibility_check, example_initial_data, lambda2_for_gamma_sup, swirl_velocity};
use axicone::solver::*;
use std::f64::consts::FRAC_PI_6;

fn config(n: usize, t_final: f64, initial: InitialData) -> SimulationConfig {
    SimulationConfig {
        alpha: FRAC_PI_6,
        m: 2,
        n_rho: n,
        n_phi: n,
        t_final,
        dt: 1e-3,
        window: t_final.min(0.01),
        min_window: 1e-3,
        scheme: Scheme::CrankNicolson,
        picard_tol: 1e-10,
        picard_max_iter: 50,
        initial,
        enforce_symmetry: false,
        cadence: 1,
        snapshot_every: 10,
        cfl_safety: 0.5,
        startup_steps: 2,
    }
}

fn example() -> InitialData {
    InitialData::Example { lambda1: 1.0, lambda2: None, gamma_sup: Some(1.0 / 200.0) }
}

#[test]
fn zero_data_stays_zero() {
    let traj = march(&config(17, 0.01, InitialData::Zero)).unwrap();
    assert!(traj.windows.iter().all(|w| w.iterations == 1));
    for r in &traj.rows {
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.gamma_sup, 0.0);
        assert_eq!(r.omega_theta_sup, 0.0);
    }
    assert!(traj.admissibility.eoo_ok && traj.admissibility.divergence_free);
}

#[test]
fn swirl_is_stationary() {
    // Γ stays constant; the meridional flow it drives is pure truncation error.
    let mut bmax = vec![];
    for n in [21, 41] {
        let traj = march(&config(n, 0.02, InitialData::Swirl { amplitude: 1.0 })).unwrap();
        let e0 = traj.rows[0].energy;
        for r in &traj.rows {
            assert!((r.energy - e0).abs() <= 1e-8 * e0, "t = {} energy {} vs {e0}", r.t, r.energy);
            assert!((r.gamma_sup - 1.0).abs() < 1e-10);
        }
        let last = &traj.snapshots.last().unwrap().state;
        assert!(last.gamma.data().iter().all(|g| (g - 1.0).abs() < 1e-10));
        bmax.push(last.b.max_abs());
    }
    assert!(bmax[0] < 1e-5, "{bmax:?}");
    let order = (bmax[0] / bmax[1]).log2();
    assert!(order > 1.8, "order {order}, {bmax:?}");
}

#[test]
fn example_run_contracts_and_dissipates() {
    let traj = march(&config(21, 0.03, example())).unwrap();
    assert_eq!(traj.windows.len(), 3);
    for w in &traj.windows {
        assert!(w.max_ratio().unwrap() < 1.0, "window {} ratios {:?}", w.index, w.ratios);
        assert!(*w.distances.last().unwrap() < 1e-10);
    }
    assert!(traj.rows.windows(2).all(|p| p[1].energy < p[0].energy));
    assert!(traj.rows.windows(2).all(|p| p[1].gamma_sup <= p[0].gamma_sup * (1.0 + 1e-12)));
    assert_eq!(traj.rows.len(), 31);
}

#[test]
fn failing_picard_halves_then_gives_up() {
    let mut cfg = config(17, 0.008, example());
    cfg.window = 0.008;
    cfg.min_window = 0.002;
    cfg.picard_max_iter = 1;
    match march(&cfg) {
        Err(SolverError::WindowFailed { t0, attempts }) => {
            assert_eq!(t0, 0.0);
            assert_eq!(attempts.len(), 3);
        }
        other => panic!("expected a failed window, got {other:?}"),
    }
}

#[test]
fn single_picard_pass_reports_nonconvergence() {
    let mut cfg = config(17, 0.004, example());
    cfg.picard_max_iter = 1;
    let sim = Simulation::new(cfg).unwrap();
    let (s0, _) = sim.initial_state().unwrap();
    match sim.picard_solve(&s0, 4) {
        Err(SolverError::NonConvergence { steps, iterations, .. }) => assert_eq!((steps, iterations), (4, 1)),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn admissibility_flags() {
    let cfg = config(33, 0.01, example());
    let g = cfg.grid().unwrap();
    let ex = admissibility_check(&example_initial_data(1.0, lambda2_for_gamma_sup(1.0 / 200.0, &g), &g), 10.0);
    assert!(ex.eoo_ok && ex.divergence_free && ex.nhl_ok);
    assert!(ex.below_regularity_threshold && ex.below_kfo_threshold);
    let sw = admissibility_check(&swirl_velocity(&g, 1.0), 10.0);
    assert!(!sw.eoo_ok);
    assert!(!sw.below_regularity_threshold);
}

#[test]
fn zero_amplitudes_give_zero_field() {
    let g = config(17, 0.01, InitialData::Zero).grid().unwrap();
    assert_eq!(example_initial_data(0.0, 0.0, &g).max_abs(), 0.0);
}

#[test]
fn lambda2_hits_the_gamma_target() {
    let cfg = config(25, 0.01, example());
    let sim = Simulation::new(cfg).unwrap();
    let (s0, adm) = sim.initial_state().unwrap();
    assert!((s0.gamma.max_abs() - 1.0 / 200.0).abs() < 1e-15);
    assert!((adm.gamma_sup - 1.0 / 200.0).abs() < 1e-15);
}

#[test]
fn symmetry_projection_removes_even_swirl() {
    let mut cfg = config(17, 0.004, InitialData::Swirl { amplitude: 1.0 });
    cfg.window = 0.002;
    cfg.enforce_symmetry = true;
    let traj = march(&cfg).unwrap();
    let last = &traj.snapshots.last().unwrap().state;
    let even = last.gamma.add(&last.gamma.reflect());
    assert!(even.max_abs() < 1e-14);
}

#[test]
fn runs_are_deterministic() {
    let cfg = config(17, 0.01, example());
    let dump = |t: &Trajectory| {
        let mut out = vec![];
        write_jsonl(&mut out, &t.rows).unwrap();
        out
    };
    assert_eq!(dump(&march(&cfg).unwrap()), dump(&march(&cfg).unwrap()));
}

#[test]
fn snapshot_restart_matches_original_data() {
    let dir = tempdir();
    let cfg = config(17, 0.01, example());
    let g = cfg.grid().unwrap();
    let v = initial_velocity(&cfg, &g).unwrap();
    let path = dir.join("v0.csv");
    write_vector_csv(&path, &v).unwrap();
    let back = read_vector_csv(&path, &g).unwrap();
    assert_eq!(back.sub(&v).max_abs(), 0.0);

    let restart = SimulationConfig { initial: InitialData::Snapshot { path }, ..cfg.clone() };
    let (a, b) = (march(&cfg).unwrap(), march(&restart).unwrap());
    let e = |t: &Trajectory| t.rows.iter().map(|r| r.energy).collect::<Vec<_>>();
    assert_eq!(e(&a), e(&b));
}

#[test]
fn snapshot_on_other_grid_is_rejected() {
    let dir = tempdir();
    let small = config(17, 0.01, example()).grid().unwrap();
    let path = dir.join("v.csv");
    write_vector_csv(&path, &swirl_velocity(&small, 1.0)).unwrap();
    let big = config(21, 0.01, example()).grid().unwrap();
    assert!(read_vector_csv(&path, &big).is_err());
}

#[test]
fn toml_config_with_angle_literal() {
    let text = r#"
alpha = "pi/6"
m = 2
n_rho = 17
n_phi = 17
t_final = 0.01
dt = 0.001
window = 0.005

[initial]
kind = "example"
lambda1 = 1.0
gamma_sup = 0.005
"#;
    let cfg: SimulationConfig = from_toml_str(text, "inline").unwrap();
    assert!((cfg.alpha - FRAC_PI_6).abs() < 1e-15);
    assert_eq!(cfg.scheme, Scheme::CrankNicolson);
    assert_eq!(cfg.startup_steps, 2);
    cfg.validate().unwrap();
    assert!(from_toml_str::<SimulationConfig>(&format!("{text}\nbogus = 1\n"), "inline").is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let base = config(17, 0.01, example());
    let bad = [
        SimulationConfig { dt: 3e-3, ..base.clone() },
        SimulationConfig { alpha: 1.0, ..base.clone() },
        SimulationConfig { n_phi: 18, ..base.clone() },
        SimulationConfig { window: 0.02, ..base.clone() },
        SimulationConfig { initial: InitialData::Example { lambda1: 1.0, lambda2: Some(1.0), gamma_sup: Some(0.1) }, ..base.clone() },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?} accepted");
    }
}

fn tempdir() -> std::path::PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static N: AtomicUsize = AtomicUsize::new(0);
    let d = std::env::temp_dir().join(format!("axicone-solver-{}-{}", std::process::id(), N.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&d).unwrap();
    d
}
