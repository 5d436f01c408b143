//! The fenestration design problem and multi-run campaigns over it.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::building::BuildingModel;
use crate::encoding::{CanonicalDesign, EvalCache, Encoder, Evaluation};
use crate::fitness::{total_fitness, FitnessConfig};
use crate::optimize::{
    de_run, ga_run, hybrid_run, shade_run, BudgetMode, DeConfig, GaConfig, HybridConfig, Objective,
    OptimizeError, RunRecord,
};
use crate::thermal::{external_evaluate, SimOptions, WeatherSeries};

/// Where simulation results come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Evaluator {
    #[default]
    Builtin,
    External(crate::thermal::ExternalCommand),
}

/// Genome → canonical design → simulation → fitness, memoized by design key.
pub struct FenestrationProblem {
    encoder: Encoder,
    building: BuildingModel,
    weather: Arc<WeatherSeries>,
    weather_path: PathBuf,
    fitness: FitnessConfig,
    sim: SimOptions,
    evaluator: Evaluator,
    bounds: Vec<(f64, f64)>,
    cache: EvalCache,
}

impl FenestrationProblem {
    pub fn new(
        encoder: Encoder,
        building: BuildingModel,
        weather: Arc<WeatherSeries>,
        weather_path: impl Into<PathBuf>,
        fitness: FitnessConfig,
        sim: SimOptions,
        evaluator: Evaluator,
    ) -> Self {
        let bounds = encoder.layout.bounds();
        Self {
            encoder,
            building,
            weather,
            weather_path: weather_path.into(),
            fitness,
            sim,
            evaluator,
            bounds,
            cache: EvalCache::new(),
        }
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn building(&self) -> &BuildingModel {
        &self.building
    }

    pub fn fitness_config(&self) -> &FitnessConfig {
        &self.fitness
    }

    pub fn weather_path(&self) -> &Path {
        &self.weather_path
    }

    pub fn cache(&self) -> &EvalCache {
        &self.cache
    }

    fn simulate_uncached(&self, design: &CanonicalDesign) -> Result<Evaluation, String> {
        let sim = match &self.evaluator {
            Evaluator::Builtin => design.simulate(&self.building, &self.weather, &self.sim).map_err(|e| e.to_string())?,
            Evaluator::External(cmd) => {
                external_evaluate(design, &self.building, &self.weather_path, cmd).map_err(|e| e.to_string())?
            }
        };
        let inputs = design.fitness_inputs(&self.building, &sim).map_err(|e| e.to_string())?;
        let fitness = total_fitness(&inputs, &self.fitness).map_err(|e| e.to_string())?;
        Ok(Evaluation { design: design.clone(), sim, fitness })
    }

    pub fn evaluate_design(&self, design: &CanonicalDesign) -> Result<Arc<Evaluation>, String> {
        self.cache.get_or_eval(&design.key, || self.simulate_uncached(design))
    }

    pub fn evaluate_genome(&self, x: &[f64]) -> Result<Arc<Evaluation>, String> {
        let design = self.encoder.canonicalize(x).map_err(|e| e.to_string())?;
        self.evaluate_design(&design)
    }
}

impl Objective for FenestrationProblem {
    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn key(&self, x: &[f64]) -> Option<String> {
        self.encoder.canonicalize(x).ok().map(|d| d.key)
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, String> {
        Ok(self.evaluate_genome(x)?.fitness.total)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Hybrid,
    Shade,
    De,
    Ga,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hybrid" => Ok(Self::Hybrid),
            "shade" => Ok(Self::Shade),
            "de" => Ok(Self::De),
            "ga" => Ok(Self::Ga),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Hybrid => "hybrid",
            Self::Shade => "shade",
            Self::De => "de",
            Self::Ga => "ga",
        })
    }
}

/// Algorithm choice with the settings of every algorithm. The budget and
/// seed fields inside the per-algorithm configs are overridden per run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub algorithm: Algorithm,
    pub hybrid: HybridConfig,
    pub ga: GaConfig,
    pub de: DeConfig,
}

pub fn run_algorithm(
    settings: &SearchSettings,
    budget: usize,
    budget_mode: BudgetMode,
    seed: u64,
    problem: &dyn Objective,
) -> Result<RunRecord, OptimizeError> {
    match settings.algorithm {
        Algorithm::Hybrid | Algorithm::Shade => {
            let cfg = HybridConfig { budget, budget_mode, seed, ..settings.hybrid.clone() };
            if settings.algorithm == Algorithm::Hybrid {
                hybrid_run(&cfg, problem)
            } else {
                shade_run(&cfg, problem)
            }
        }
        Algorithm::Ga => ga_run(&GaConfig { budget, budget_mode, seed, ..settings.ga.clone() }, problem),
        Algorithm::De => de_run(&settings.de, budget, budget_mode, seed, problem),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub search: SearchSettings,
    pub budget: usize,
    pub budget_mode: BudgetMode,
    /// One run per seed.
    pub seeds: Vec<u64>,
    /// Runs in flight at once.
    pub parallel: usize,
}

impl CampaignSpec {
    /// `runs` consecutive seeds starting at `base_seed`.
    pub fn seeds_from(base_seed: u64, runs: usize) -> Vec<u64> {
        (0..runs as u64).map(|i| base_seed.wrapping_add(i)).collect()
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.seeds.is_empty() {
            return Err(OptimizeError::Config("a campaign needs at least one run".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(OptimizeError::Config("run seeds must be unique".into()));
        }
        if self.budget == 0 {
            return Err(OptimizeError::Config("budget must be positive".into()));
        }
        Ok(())
    }
}

/// Runs every seed of the campaign and returns the records in seed order.
/// Each run is deterministic in its seed, so `parallel` does not change
/// the results.
pub fn run_campaign(spec: &CampaignSpec, problem: &dyn Objective) -> Result<Vec<RunRecord>, OptimizeError> {
    spec.validate()?;
    let n = spec.seeds.len();
    let results: Mutex<Vec<Option<Result<RunRecord, OptimizeError>>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n {
            break;
        }
        let r = run_algorithm(&spec.search, spec.budget, spec.budget_mode, spec.seeds[i], problem);
        let failed = r.is_err();
        results.lock().expect("result lock poisoned")[i] = Some(r);
        if failed {
            // No point starting more runs.
            next.store(n, Ordering::SeqCst);
        }
    };
    std::thread::scope(|s| {
        for _ in 1..spec.parallel.clamp(1, n) {
            s.spawn(work);
        }
        work();
    });
    results.into_inner().expect("result lock poisoned").into_iter().flatten().collect()
}
