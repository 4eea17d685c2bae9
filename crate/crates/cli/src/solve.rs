//! `solve` and `diagnose`.

use crate::config::{output_dir, SolveConfig};
use crate::manifest::{read_manifest, Recorder, SnapshotEntry};
use crate::{CliError, Outcome};
use axicone::diagnostics::{audit, read_jsonl, write_csv, write_jsonl, AuditContext, AuditSummary};
use axicone::io::write_vector_csv;
use axicone::solver::initial::Admissibility;
use axicone::solver::{Simulation, SolverError, Trajectory, WindowRecord};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const ROWS: &str = "diagnostics.jsonl";
pub const TIMESERIES: &str = "timeseries.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub completed: bool,
    pub pass: bool,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub admissibility: Option<serde_json::Value>,
    pub windows: Vec<WindowRecord>,
    #[serde(default)]
    pub audit: Option<AuditSummary>,
    pub warnings: Vec<String>,
}

pub struct SolveOutcome {
    pub outcome: Outcome,
    pub summary: SolveSummary,
    pub trajectory: Option<Trajectory>,
}

fn admissibility_warnings(a: &Admissibility) -> Vec<String> {
    let mut w = vec![];
    if !a.eoo_ok {
        w.push(format!("initial data is not even-odd-odd (relative residual {:.3e})", a.eoo_relative));
    }
    if !a.divergence_free {
        w.push(format!("initial data divergence {:.3e} above the truncation level", a.div_relative));
    }
    if !a.nhl_ok {
        w.push(format!("initial data slip residual {:.3e} above the truncation level", a.nhl_relative));
    }
    if !a.below_kfo_threshold {
        w.push(format!("sup|Gamma_0| = {:.4e} is above the K/F/Omega threshold", a.gamma_sup));
    }
    w
}

/// Marches, writes snapshots, rows, time series, summary and manifest, then audits.
///
/// A failed window is reported through the summary and returned as the error.
pub fn solve(cfg: &SolveConfig, override_dir: Option<&Path>) -> Result<SolveOutcome, CliError> {
    cfg.simulation.validate()?;
    let dir = output_dir(cfg.output_dir.as_deref(), override_dir, "out/solve");
    let mut rec = Recorder::new(&dir)?;
    let sim = Simulation::new(cfg.simulation.clone())?;
    rec.lap("setup");
    let traj = match sim.march() {
        Ok(t) => t,
        Err(e) => {
            let failed = SolveSummary {
                completed: false,
                pass: false,
                error: Some(e.to_string()),
                admissibility: None,
                windows: vec![],
                audit: None,
                warnings: vec![],
            };
            rec.lap("march");
            rec.write_json(SUMMARY, &failed)?;
            rec.finish("solve", cfg, vec![])?;
            return Err(e.into());
        }
    };
    rec.lap("march");

    fs::create_dir_all(rec.path("snapshots")).map_err(CliError::io(rec.path("snapshots")))?;
    let mut snaps = vec![];
    for s in &traj.snapshots {
        let rel = PathBuf::from(format!("snapshots/v_{:06}.csv", s.step));
        write_vector_csv(rec.path(&rel), &s.state.velocity())?;
        rec.add(rel.clone());
        snaps.push(SnapshotEntry { step: s.step, t: s.state.t, file: rel });
    }
    let mut buf = vec![];
    write_jsonl(&mut buf, &traj.rows).map_err(CliError::io(rec.path(ROWS)))?;
    rec.write(ROWS, buf)?;
    let mut buf = vec![];
    write_csv(&mut buf, &traj.rows).map_err(|e| CliError::Io { path: rec.path(TIMESERIES), source: std::io::Error::other(e) })?;
    rec.write(TIMESERIES, buf)?;
    rec.lap("output");

    let ctx = AuditContext::from_trajectory(&traj, cfg.audit.c, cfg.audit.growth);
    let summary = audit(&traj.rows, &ctx, cfg.audit.select);
    rec.lap("audit");
    let mut warnings = admissibility_warnings(&traj.admissibility);
    warnings.extend(summary.warnings.iter().cloned());
    let lines = audit_lines(&summary);
    let out = SolveSummary {
        completed: true,
        pass: summary.pass,
        error: None,
        admissibility: Some(serde_json::to_value(&traj.admissibility)?),
        windows: traj.windows.clone(),
        audit: Some(summary),
        warnings: warnings.clone(),
    };
    rec.write_json(SUMMARY, &out)?;
    rec.finish("solve", cfg, snaps)?;
    Ok(SolveOutcome {
        outcome: Outcome { pass: out.pass, output_dir: dir, lines, warnings },
        summary: out,
        trajectory: Some(traj),
    })
}

fn audit_lines(s: &AuditSummary) -> Vec<String> {
    let mut lines = vec![];
    let verdict = |p: Option<bool>| match p {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "hypothesis unmet",
    };
    for a in std::iter::once(&s.picard_contraction).chain(&s.audits) {
        lines.push(format!("{}: {} (lhs {:.4e}, rhs {:.4e}, slack {:.3e})", a.name, verdict(a.pass), a.lhs, a.rhs, a.slack));
    }
    lines
}

/// Re-audits a stored run directory. Output goes to `override_dir` or the run directory.
pub fn diagnose(run_dir: &Path, override_dir: Option<&Path>) -> Result<(Outcome, AuditSummary), CliError> {
    let manifest = read_manifest(run_dir)?;
    if manifest.command != "solve" {
        return Err(CliError::Usage(format!("{} holds a {} run, not a solve run", run_dir.display(), manifest.command)));
    }
    let cfg: SolveConfig = serde_json::from_value(manifest.config)?;
    let read = |name: &str| {
        let p = run_dir.join(name);
        fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))
    };
    let stored: SolveSummary = serde_json::from_str(&read(SUMMARY)?)?;
    let Some(prev) = stored.audit else {
        return Err(CliError::Usage(format!("{} did not complete; nothing to audit", run_dir.display())));
    };
    let rows = read_jsonl(&read(ROWS)?)?;
    let summary = audit(&rows, &prev.context, cfg.audit.select);
    let mut warnings = summary.warnings.clone();
    if summary.audits != prev.audits {
        warnings.push("re-audit differs from the stored summary".into());
    }
    let dir = override_dir.unwrap_or(run_dir).to_path_buf();
    fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let p = dir.join("reaudit.json");
    fs::write(&p, serde_json::to_string_pretty(&summary)? + "\n").map_err(CliError::io(&p))?;
    let outcome = Outcome { pass: summary.pass, output_dir: dir, lines: audit_lines(&summary), warnings };
    Ok((outcome, summary))
}

/// Ratio history of a failed window, if the error carries one.
pub fn failure_ratios(e: &CliError) -> Option<Vec<Vec<f64>>> {
    match e {
        CliError::Solver(SolverError::WindowFailed { attempts, .. }) => Some(attempts.clone()),
        CliError::Solver(SolverError::NonConvergence { ratios, .. }) => Some(vec![ratios.clone()]),
        _ => None,
    }
}
