use crate::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: usize,
    pub t: f64,
    pub file: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub output_dir: PathBuf,
    pub files: Vec<FileEntry>,
    #[serde(default)]
    pub snapshots: Vec<SnapshotEntry>,
    pub versions: BTreeMap<String, String>,
    /// Seconds per phase.
    pub wall_times: BTreeMap<String, f64>,
}

pub const MANIFEST: &str = "manifest.json";

/// Collects written files and phase timings for one output directory.
pub struct Recorder {
    dir: PathBuf,
    files: Vec<PathBuf>,
    times: BTreeMap<String, f64>,
    clock: Instant,
}

impl Recorder {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self { dir: dir.to_path_buf(), files: vec![], times: BTreeMap::new(), clock: Instant::now() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.dir.join(rel)
    }

    /// Notes a file written under the output directory.
    pub fn add(&mut self, rel: impl Into<PathBuf>) {
        self.files.push(rel.into());
    }

    pub fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let p = self.path(rel);
        fs::write(&p, bytes).map_err(CliError::io(&p))?;
        self.add(rel);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(rel, text + "\n")
    }

    /// Records the time since the previous lap under `phase`.
    pub fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        *self.times.entry(phase.to_owned()).or_default() += (now - self.clock).as_secs_f64();
        self.clock = now;
    }

    pub fn finish(mut self, command: &str, config: &impl Serialize, snapshots: Vec<SnapshotEntry>) -> Result<RunManifest, CliError> {
        self.lap("output");
        let total = self.times.values().sum();
        self.times.insert("total".into(), total);
        let mut files = vec![];
        for rel in &self.files {
            let p = self.dir.join(rel);
            let meta = fs::metadata(&p).map_err(CliError::io(&p))?;
            files.push(FileEntry { path: rel.clone(), bytes: meta.len() });
        }
        let versions = BTreeMap::from([
            ("axicone".to_owned(), axicone_version().to_owned()),
            ("axicone-cli".to_owned(), env!("CARGO_PKG_VERSION").to_owned()),
        ]);
        let m = RunManifest {
            command: command.to_owned(),
            config: serde_json::to_value(config)?,
            output_dir: self.dir.clone(),
            files,
            snapshots,
            versions,
            wall_times: self.times,
        };
        let p = self.dir.join(MANIFEST);
        fs::write(&p, serde_json::to_string_pretty(&m)? + "\n").map_err(CliError::io(&p))?;
        Ok(m)
    }
}

fn axicone_version() -> &'static str {
    axicone::VERSION
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let p = dir.join(MANIFEST);
    let text = fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
    Ok(serde_json::from_str(&text)?)
}
