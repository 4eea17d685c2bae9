//! `verify-inequalities`: Poincaré constants, Hardy, curl-vs-gradient and H¹ equivalence.

use crate::config::{output_dir, VerifyConfig};
use crate::corpus::{random_smooth, random_stream};
use crate::manifest::Recorder;
use crate::{CliError, Outcome};
use axicone::field::{ScalarField, VectorField};
use axicone::geometry::MeridianDomain;
use axicone::grid::MeridianGrid;
use axicone::inequalities::*;
use axicone::solver::initial::stream_velocity;
use axicone::Grid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::Path;
use std::sync::Arc;

pub struct VerifyOutcome {
    pub outcome: Outcome,
    pub reports: Vec<InequalityReport>,
}

fn grid(alpha: f64, m: u32, n: usize) -> Result<Arc<Grid>, CliError> {
    let d = MeridianDomain::new(alpha, m).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(MeridianGrid::new(d, n, n).map_err(|e| CliError::Usage(e.to_string()))?.shared())
}

fn validate(cfg: &VerifyConfig) -> Result<(), CliError> {
    let bad = |s: &str| Err(CliError::Usage(s.to_owned()));
    if cfg.poincare.alphas.is_empty() {
        return bad("poincare.alphas is empty");
    }
    if cfg.curl_grad.alphas.is_empty() {
        return bad("curl_grad.alphas is empty");
    }
    if cfg.poincare.sizes.is_empty() {
        return bad("poincare.sizes is empty");
    }
    if cfg.hardy.fields == 0 || cfg.curl_grad.fields == 0 || cfg.h1.fields == 0 {
        return bad("corpus sizes must be positive");
    }
    Ok(())
}

/// Summary line for a group of reports.
fn group_line(name: &str, reports: &[InequalityReport]) -> String {
    let passed = reports.iter().filter(|r| r.pass).count();
    let worst = reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    format!("{name}: {passed}/{} pass, smallest slack {worst:.3e}", reports.len())
}

fn curl_grad_group(cfg: &VerifyConfig) -> Result<Vec<InequalityReport>, CliError> {
    let s = &cfg.curl_grad;
    let mut out = vec![];
    for &alpha in &s.alphas {
        let g = grid(alpha, s.m, s.n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        for _ in 0..s.fields {
            let d = random_stream(&mut rng);
            match curl_grad_check(&stream_velocity(&g, d)) {
                Ok(r) => out.push(r),
                Err(e @ InequalityError::Hypothesis { hypothesis: "alpha <= pi/6", .. }) => return Err(e.into()),
                Err(InequalityError::Hypothesis { lhs, rhs, .. }) => {
                    // A manufactured field that misses a hypothesis counts as a failed check.
                    let mut r = InequalityReport::new("curl_grad", alpha, s.n, lhs, rhs, 3f64.sqrt(), 0.0);
                    r.pass = false;
                    out.push(r);
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(out)
}

/// Observed orders `log₂(|c₁ − c₀| / |c₂ − c₁|)` over consecutive size triples.
pub fn observed_orders(values: &[f64]) -> Vec<f64> {
    values.windows(3).map(|w| ((w[1] - w[0]).abs() / (w[2] - w[1]).abs()).log2()).collect()
}

fn poincare_group(cfg: &VerifyConfig) -> Result<Vec<InequalityReport>, CliError> {
    let s = &cfg.poincare;
    let mut out = vec![];
    for &alpha in &s.alphas {
        let mut modes = vec![(PoincareSubspace::MeanZero, poincare_const_a(alpha)?, "mean_zero")];
        if alpha <= FRAC_PI_4 * (1.0 + 1e-15) {
            modes.push((PoincareSubspace::Dirichlet, poincare_const_b(alpha)?, "dirichlet"));
        }
        for (mode, closed, tag) in modes {
            let mut sharp = vec![];
            for &n in &s.sizes {
                let c = sharp_weighted_constant(alpha, mode, n)?;
                sharp.push(c);
                let tol = 10.0 / (n * n) as f64;
                out.push(InequalityReport::new(&format!("poincare_{tag}_constant"), alpha, n, c, closed, closed, tol));
            }
            if s.sizes.len() >= 3 {
                let orders = observed_orders(&sharp);
                let worst = orders.iter().cloned().fold(f64::INFINITY, f64::min);
                let n = *s.sizes.last().unwrap();
                out.push(InequalityReport::new(&format!("poincare_{tag}_order"), alpha, n, 1.9, worst, 2.0, 0.0));
            }
        }
        // Field-level checks with the extremal angular profile.
        let g = grid(alpha, 2, s.field_n)?;
        let q = FRAC_PI_2 / alpha;
        let odd = ScalarField::from_fn(&g, |r, p| (1.0 + r) * (q * (p - FRAC_PI_2)).sin());
        out.push(poincare_field_check(&odd, PoincareSubspace::MeanZero)?);
        if alpha <= FRAC_PI_4 * (1.0 + 1e-15) {
            let even = ScalarField::from_fn(&g, |r, p| r * r * (q * (p - FRAC_PI_2)).cos());
            out.push(poincare_field_check(&even, PoincareSubspace::Dirichlet)?);
        }
    }
    Ok(out)
}

fn hardy_group(cfg: &VerifyConfig) -> Result<Vec<InequalityReport>, CliError> {
    let s = &cfg.hardy;
    let g = grid(s.alpha, s.m, s.n)?;
    let mut out = vec![];
    let mut one = hardy_check(&ScalarField::constant(&g, 1.0), s.epsilon)?;
    one.name = "hardy_constant".into();
    out.push(one);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    for _ in 0..s.fields {
        out.push(hardy_check(&random_smooth(&g, &mut rng), s.epsilon)?);
    }
    Ok(out)
}

fn h1_group(cfg: &VerifyConfig) -> Result<Vec<InequalityReport>, CliError> {
    let s = &cfg.h1;
    let g = grid(s.alpha, s.m, s.n)?;
    let bound = h1_equivalence_bound(s.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut out = vec![];
    for _ in 0..s.fields {
        let v = VectorField::new(random_smooth(&g, &mut rng), random_smooth(&g, &mut rng), random_smooth(&g, &mut rng))
            .expect("fields share the grid");
        let r = h1_equivalence_ratio(&v);
        out.push(InequalityReport::new("h1_equivalence", s.alpha, s.n, r.max(1.0 / r), bound, bound, 0.0));
    }
    Ok(out)
}

/// Runs every group, writes `report.jsonl`, `summary.json` and the manifest.
pub fn verify_inequalities(cfg: &VerifyConfig, override_dir: Option<&Path>) -> Result<VerifyOutcome, CliError> {
    validate(cfg)?;
    let dir = output_dir(cfg.output_dir.as_deref(), override_dir, "out/inequalities");
    let mut rec = Recorder::new(&dir)?;
    let mut reports = vec![];
    let mut lines = vec![];
    let groups: [(&str, fn(&VerifyConfig) -> Result<Vec<InequalityReport>, CliError>); 4] =
        [("curl_grad", curl_grad_group), ("poincare", poincare_group), ("hardy", hardy_group), ("h1_equivalence", h1_group)];
    for (name, f) in groups {
        let r = f(cfg)?;
        rec.lap(name);
        lines.push(group_line(name, &r));
        reports.extend(r);
    }
    let mut text = String::new();
    for r in &reports {
        text += &serde_json::to_string(r)?;
        text.push('\n');
    }
    rec.write("report.jsonl", text)?;
    let pass = reports.iter().all(|r| r.pass);
    let failed: Vec<&InequalityReport> = reports.iter().filter(|r| !r.pass).collect();
    rec.write_json("summary.json", &serde_json::json!({ "pass": pass, "checks": reports.len(), "groups": lines, "failed": failed }))?;
    rec.finish("verify-inequalities", cfg, vec![])?;
    Ok(VerifyOutcome { outcome: Outcome { pass, output_dir: dir, lines, warnings: vec![] }, reports })
}
