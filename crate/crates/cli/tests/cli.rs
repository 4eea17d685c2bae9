use axicone::config::from_toml_str;
use axicone_cli::analytic::analytic_tests;
use axicone_cli::config::{preset, AnalyticConfig, ConfigSource, SolveConfig, VerifyConfig};
use axicone_cli::manifest::read_manifest;
use axicone_cli::solve::{diagnose, solve, SolveSummary};
use axicone_cli::verify::verify_inequalities;
use axicone_cli::CliError;
use std::path::Path;
use std::process::Command;
use tempfile::TempDir;

fn load<T: serde::de::DeserializeOwned>(name: &str) -> T {
    ConfigSource::Preset(name.into()).load().unwrap()
}

/// Preset text with `key = old` replaced by `key = new` on the first match.
fn edited<T: serde::de::DeserializeOwned>(name: &str, edits: &[(&str, &str)]) -> Result<T, CliError> {
    let mut text = preset(name).unwrap().to_owned();
    for (old, new) in edits {
        assert!(text.contains(old), "{old:?} not in preset {name}");
        text = text.replacen(old, new, 1);
    }
    Ok(from_toml_str(&text, name)?)
}

fn small_verify() -> VerifyConfig {
    let mut cfg: VerifyConfig = load("inequalities");
    cfg.hardy.fields = 50;
    cfg.curl_grad.fields = 10;
    cfg.curl_grad.n = 33;
    cfg.h1.fields = 5;
    cfg
}

fn all_files_exist(dir: &Path) {
    let m = read_manifest(dir).unwrap();
    assert!(!m.files.is_empty());
    for f in &m.files {
        let p = dir.join(&f.path);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), f.bytes, "{}", p.display());
    }
    for s in &m.snapshots {
        assert!(dir.join(&s.file).exists());
    }
}

#[test]
fn verify_writes_one_object_per_check() {
    let tmp = TempDir::new().unwrap();
    let out = verify_inequalities(&small_verify(), Some(tmp.path())).unwrap();
    assert_eq!(out.outcome.exit_code(), 0, "{:?}", out.outcome.lines);
    let text = std::fs::read_to_string(tmp.path().join("report.jsonl")).unwrap();
    assert_eq!(text.lines().count(), out.reports.len());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["name", "alpha", "N", "lhs", "rhs", "constant", "pass"] {
            assert!(v.get(key).is_some(), "{key} missing in {line}");
        }
    }
    all_files_exist(tmp.path());
}

#[test]
fn wide_cone_for_curl_grad_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_verify();
    cfg.curl_grad.alphas = vec![std::f64::consts::PI / 3.0];
    let e = verify_inequalities(&cfg, Some(tmp.path())).err().unwrap();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("alpha <= pi/6"), "{e}");
}

#[test]
fn empty_angle_list_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg: VerifyConfig = edited("inequalities", &[(r#"alphas = ["pi/6", "pi/4"]"#, "alphas = []")]).unwrap();
    let e = verify_inequalities(&cfg, Some(tmp.path())).err().unwrap();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("empty"));
}

#[test]
fn swirl_preset_passes_with_flat_energy() {
    let tmp = TempDir::new().unwrap();
    let out = solve(&load::<SolveConfig>("swirl"), Some(tmp.path())).unwrap();
    assert_eq!(out.outcome.exit_code(), 0, "{:#?}", out.outcome.lines);
    let rows = &out.trajectory.as_ref().unwrap().rows;
    let e0 = rows[0].energy;
    assert!(rows.iter().all(|r| (r.energy - e0).abs() <= 1e-8 * e0));
    let csv = std::fs::read_to_string(tmp.path().join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), rows.len() + 1);
    all_files_exist(tmp.path());
}

#[test]
fn example_preset_on_a_coarse_grid_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg: SolveConfig =
        edited("example", &[("n_rho = 129", "n_rho = 33"), ("n_phi = 129", "n_phi = 33"), ("t_final = 0.5", "t_final = 0.05")]).unwrap();
    let out = solve(&cfg, Some(tmp.path())).unwrap();
    let audit = out.summary.audit.as_ref().unwrap();
    for a in &audit.audits {
        assert_eq!(a.pass, Some(true), "{a:#?}");
    }
    assert_eq!(out.outcome.exit_code(), 0);
    assert!(out.outcome.warnings.iter().all(|w| !w.contains("hypothesis unmet")));
}

#[test]
fn gamma1_preset_passes_with_a_kfo_warning() {
    let tmp = TempDir::new().unwrap();
    let out = solve(&load::<SolveConfig>("gamma1"), Some(tmp.path())).unwrap();
    assert_eq!(out.outcome.exit_code(), 0);
    let kfo = out.summary.audit.as_ref().unwrap().audits.iter().find(|a| a.name == "K/F/Omega energy (1/10)").unwrap();
    assert!(!kfo.hypothesis_met && kfo.pass.is_none());
    assert!(out.outcome.warnings.iter().any(|w| w.starts_with("K/F/Omega energy (1/10): hypothesis unmet")));
}

#[test]
fn failed_picard_exits_one_and_records_the_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg: SolveConfig = edited(
        "example",
        &[
            ("n_rho = 129", "n_rho = 17"),
            ("n_phi = 129", "n_phi = 17"),
            ("t_final = 0.5", "t_final = 0.01"),
            ("window = 0.025", "window = 0.01\npicard_max_iter = 1"),
            ("min_window = 5e-4", "min_window = 5e-3"),
        ],
    )
    .unwrap();
    let e = solve(&cfg, Some(tmp.path())).err().unwrap();
    assert_eq!(e.exit_code(), 1);
    assert_eq!(axicone_cli::solve::failure_ratios(&e).unwrap().len(), 2);
    let s: SolveSummary = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert!(!s.completed && s.error.is_some());
    all_files_exist(tmp.path());
}

#[test]
fn invalid_simulation_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg: SolveConfig = edited("swirl", &[("dt = 1e-3", "dt = 3e-2")]).unwrap();
    assert_eq!(solve(&cfg, Some(tmp.path())).err().unwrap().exit_code(), 2);
    let e = edited::<SolveConfig>("swirl", &[("m = 2", "m = 2\nbogus = 1")]).err().unwrap();
    assert_eq!(e.exit_code(), 2);
    assert_eq!(ConfigSource::Preset("nope".into()).load::<SolveConfig>().err().unwrap().exit_code(), 2);
}

#[test]
fn diagnose_reproduces_the_stored_audit() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    let out = solve(&load::<SolveConfig>("gamma1"), Some(&run)).unwrap();
    let (o, s) = diagnose(&run, None).unwrap();
    assert_eq!(o.exit_code(), 0);
    assert_eq!(s.audits, out.summary.audit.unwrap().audits);
    assert!(o.warnings.iter().all(|w| !w.contains("differs")));
    assert!(run.join("reaudit.json").exists());
    assert_eq!(diagnose(&tmp.path().join("missing"), None).err().unwrap().exit_code(), 2);
}

#[test]
fn solve_outputs_are_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg: SolveConfig = edited("gamma1", &[("t_final = 0.05", "t_final = 0.025")]).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    solve(&cfg, Some(&a)).unwrap();
    solve(&cfg, Some(&b)).unwrap();
    let m = read_manifest(&a).unwrap();
    let mut compared = 0;
    for f in m.files.iter().filter(|f| f.path.extension().is_some_and(|e| e == "csv" || e == "jsonl")) {
        assert_eq!(std::fs::read(a.join(&f.path)).unwrap(), std::fs::read(b.join(&f.path)).unwrap(), "{}", f.path.display());
        compared += 1;
    }
    assert!(compared >= 3);
}

#[test]
fn analytic_preset_passes_every_oracle() {
    let tmp = TempDir::new().unwrap();
    let out = analytic_tests(&load::<AnalyticConfig>("analytic"), Some(tmp.path())).unwrap();
    assert!(out.verdicts.iter().all(|v| v.pass), "{:#?}", out.verdicts);
    assert!(out.verdicts.iter().any(|v| v.oracle == "cusp energy"));
    assert_eq!(out.outcome.exit_code(), 0);
    all_files_exist(tmp.path());
}

#[test]
fn small_beta_with_energy_check_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg: AnalyticConfig = edited("analytic", &[("beta = 3.0", "beta = 1.5")]).unwrap();
    assert_eq!(analytic_tests(&cfg, Some(tmp.path())).err().unwrap().exit_code(), 2);
}

#[test]
fn small_beta_residual_only_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let cfg: AnalyticConfig = edited("analytic", &[("beta = 3.0", "beta = 1.5"), ("check_energy = true", "check_energy = false")]).unwrap();
    let out = analytic_tests(&cfg, Some(tmp.path())).unwrap();
    assert_eq!(out.outcome.exit_code(), 0);
    assert!(!out.outcome.warnings.is_empty());
    let slab = out.verdicts.iter().find(|v| v.oracle == "cusp residual slab 1").unwrap();
    assert_eq!(slab.details["finite_energy"], false);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_axicone"))
}

#[test]
fn binary_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let status = bin().args(["analytic-tests", "--preset", "analytic"]).env("OUTPUT_DIR", tmp.path()).output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(tmp.path().join("verdicts.jsonl").exists());

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, preset("analytic").unwrap().replace("beta = 3.0", "beta = 1.5")).unwrap();
    let out = bin().arg("analytic-tests").arg(&bad).env("OUTPUT_DIR", tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta > 2"));

    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["solve", "/nonexistent.toml"]).output().unwrap().status.code(), Some(2));
    let reference = bin().arg("reference").output().unwrap();
    assert_eq!(reference.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&reference.stdout).contains("[simulation.initial]"));
}

#[test]
fn reference_sections_parse() {
    // Split the reference at its subcommand banners and parse each part with the shared output_dir.
    let text = axicone_cli::config::REFERENCE;
    let parts: Vec<&str> = text.split("# ---------------------------------------------------------------------\n# ").collect();
    assert_eq!(parts.len(), 4);
    let body = |p: &str| p.split_once('\n').unwrap().1.split_once('\n').unwrap().1.to_owned();
    let verify: VerifyConfig = from_toml_str(&body(parts[1]), "reference").unwrap();
    assert_eq!(verify.hardy.fields, 1000);
    let solve_cfg: SolveConfig = from_toml_str(&body(parts[2]), "reference").unwrap();
    solve_cfg.simulation.validate().unwrap();
    let analytic: AnalyticConfig = from_toml_str(&body(parts[3]), "reference").unwrap();
    assert!(analytic.cusp.unwrap().check_energy);
}
