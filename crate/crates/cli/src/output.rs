//! Campaign directories: manifest, per-run records and tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fenopt::analysis::{SolutionRow, Variability};
use fenopt::encoding::CacheStats;
use fenopt::optimize::{BudgetMode, RunRecord};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

/// Writes through a temporary file in the target directory, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub file: String,
    pub best_f: f64,
    pub evaluations: usize,
    pub restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_free: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    /// `fenestration` or `benchmark`.
    pub kind: String,
    /// Location or benchmark function; compare matches campaigns by it.
    pub label: String,
    pub algorithm: String,
    pub budget: usize,
    pub budget_mode: BudgetMode,
    pub runs: Vec<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<CacheStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_solution: Option<String>,
    /// Standard deviations divide by N.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub variability: BTreeMap<String, Variability>,
    pub files: Vec<String>,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))
    }

    pub fn final_values(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.best_f).collect()
    }
}

/// A run record with the best design it found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub record: RunRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_design: Option<SolutionRow>,
}

pub fn run_file(i: usize) -> String {
    format!("runs/run_{i:02}.json")
}

/// Files of a campaign collected in memory and written once complete.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes every file, then the manifest last.
    pub fn write(self, dir: &Path, manifest: &Manifest) -> Result<PathBuf> {
        for (name, bytes) in &self.files {
            write_atomic(&dir.join(name), bytes)?;
        }
        let path = dir.join(MANIFEST);
        write_json(&path, manifest)?;
        Ok(path)
    }
}
