//! Command configurations and the built-in presets.

use crate::CliError;
use axicone::config::{de_angle, de_angles, from_toml_str, load};
use axicone::diagnostics::AuditSelection;
use axicone::solver::SimulationConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const PRESETS: &[(&str, &str)] = &[
    ("inequalities", include_str!("../presets/inequalities.toml")),
    ("example", include_str!("../presets/example.toml")),
    ("swirl", include_str!("../presets/swirl.toml")),
    ("gamma1", include_str!("../presets/gamma1.toml")),
    ("analytic", include_str!("../presets/analytic.toml")),
];

/// Annotated file listing every key.
pub const REFERENCE: &str = include_str!("../presets/reference.toml");

#[derive(Debug, Clone)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

impl ConfigSource {
    pub fn load<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        match self {
            ConfigSource::File(p) => Ok(load(p)?),
            ConfigSource::Preset(name) => Ok(from_toml_str(preset(name)?, &format!("preset {name}"))?),
        }
    }
}

pub fn preset(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Usage(format!("unknown preset {name:?}; available: {}", names.join(", ")))
        })
}

/// `override_dir`, else the configured directory, else `default`.
pub fn output_dir(configured: Option<&Path>, override_dir: Option<&Path>, default: &str) -> PathBuf {
    override_dir.or(configured).map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(default))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareSection {
    #[serde(deserialize_with = "de_angles")]
    pub alphas: Vec<f64>,
    /// Eigenproblem sizes; three or more enable the convergence-order check.
    pub sizes: Vec<usize>,
    /// Grid size for the field-level checks.
    pub field_n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySection {
    #[serde(deserialize_with = "de_angle")]
    pub alpha: f64,
    pub m: u32,
    pub n: usize,
    pub fields: usize,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurlGradSection {
    #[serde(deserialize_with = "de_angles")]
    pub alphas: Vec<f64>,
    pub m: u32,
    pub n: usize,
    pub fields: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H1Section {
    #[serde(deserialize_with = "de_angle")]
    pub alpha: f64,
    pub m: u32,
    pub n: usize,
    pub fields: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub poincare: PoincareSection,
    pub hardy: HardySection,
    pub curl_grad: CurlGradSection,
    pub h1: H1Section,
}

fn default_c() -> f64 {
    10.0
}
fn default_growth() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSettings {
    /// Tolerance multiplier.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Allowed growth of consecutive window maxima in the bound monitors.
    #[serde(default = "default_growth")]
    pub growth: f64,
    #[serde(default)]
    pub select: AuditSelection,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self { c: default_c(), growth: default_growth(), select: AuditSelection::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub audit: AuditSettings,
}

fn default_start() -> f64 {
    1.0
}
fn default_end() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSection {
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_end")]
    pub end: f64,
}

impl Default for EtaSection {
    fn default() -> Self {
        Self { start: default_start(), end: default_end() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwirlSection {
    #[serde(deserialize_with = "de_angle")]
    pub alpha: f64,
    pub m: u32,
    pub sizes: Vec<usize>,
}

fn default_quadrature() -> usize {
    401
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuspSection {
    pub beta: f64,
    pub depth: u32,
    /// Nodes per direction on each slab, coarse to fine.
    pub nodes: Vec<usize>,
    pub times: Vec<f64>,
    #[serde(default)]
    pub check_energy: bool,
    #[serde(default = "default_quadrature")]
    pub quadrature_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub eta: EtaSection,
    #[serde(default)]
    pub swirl: Option<SwirlSection>,
    #[serde(default)]
    pub cusp: Option<CuspSection>,
}
