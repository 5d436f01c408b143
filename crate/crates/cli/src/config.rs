//! Campaign configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fenopt::campaign::{CampaignSpec, Evaluator, SearchSettings};
use fenopt::encoding::Scenario;
use fenopt::fitness::{FitnessConfig, Location};
use fenopt::optimize::BudgetMode;
use fenopt::thermal::Schedule1Reading;
use serde::{Deserialize, Serialize};

fn default_budget() -> usize {
    2000
}

fn default_runs() -> usize {
    15
}

fn default_base_seed() -> u64 {
    1
}

fn default_top_k() -> usize {
    fenopt::analysis::DEFAULT_TOP_K
}

/// One campaign: a location, a scenario and the search settings. Relative
/// paths are resolved against the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Preset name (leon, madrid, sevilla). Ignored when `fitness` is given.
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub fitness: Option<FitnessConfig>,
    #[serde(default)]
    pub scenario: Scenario,
    pub weather: PathBuf,
    pub geometry: PathBuf,
    pub catalog: PathBuf,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub budget_mode: BudgetMode,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Explicit seeds; otherwise `runs` consecutive seeds from `base_seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    pub output: PathBuf,
    #[serde(default)]
    pub evaluator: Evaluator,
    #[serde(default)]
    pub schedule1: Schedule1Reading,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.weather, &mut cfg.geometry, &mut cfg.catalog, &mut cfg.output] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn fitness_config(&self) -> Result<FitnessConfig> {
        if let Some(f) = &self.fitness {
            return Ok(f.clone());
        }
        let Some(name) = &self.location else {
            bail!("config needs either `location` or `fitness`");
        };
        let location: Location = name.parse().map_err(anyhow::Error::msg)?;
        Ok(FitnessConfig::preset(location))
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => CampaignSpec::seeds_from(self.base_seed, self.runs),
        }
    }

    /// Checks everything that can be checked before any simulation runs.
    pub fn validate(&self) -> Result<()> {
        for (what, p) in [("weather file", &self.weather), ("geometry file", &self.geometry), ("catalog file", &self.catalog)] {
            if !p.is_file() {
                bail!("{what} not found: {}", p.display());
            }
        }
        if let Evaluator::External(cmd) = &self.evaluator {
            if cmd.program.is_empty() {
                bail!("external evaluator needs a program");
            }
        }
        if self.top_k == 0 {
            bail!("top_k must be positive");
        }
        Ok(())
    }
}
