use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use fenopt::analysis::export::{frequency_rows, write_solutions};
use fenopt::analysis::{best_genomes, frequency, robustness, select_best, solution_table, Demands, SolutionRow};
use fenopt::building::BuildingModel;
use fenopt::campaign::{run_campaign, CampaignSpec, FenestrationProblem};
use fenopt::catalog::Catalog;
use fenopt::encoding::Encoder;
use fenopt::thermal::{SimOptions, WeatherSeries};

use super::{add_run_files, csv_bytes, spread};
use crate::config::RunConfig;
use crate::error::{config, optimize};
use crate::output::{Artifacts, Manifest, SCHEMA_VERSION};

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Number of runs; truncates an explicit seed list.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Evaluation budget per run.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Base seed; replaces an explicit seed list.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
}

fn apply_overrides(cfg: &mut RunConfig, args: &RunArgs) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
        cfg.seeds = None;
    }
    if let Some(runs) = args.runs {
        match &mut cfg.seeds {
            Some(seeds) if seeds.len() < runs => {
                return Err(anyhow!("--runs {runs} exceeds the {} seeds listed in the config", seeds.len()));
            }
            Some(seeds) => seeds.truncate(runs),
            None => cfg.runs = runs,
        }
    }
    if let Some(b) = args.budget {
        cfg.budget = b;
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    Ok(())
}

fn load_problem(cfg: &RunConfig) -> Result<FenestrationProblem> {
    let catalog = Catalog::load(&cfg.catalog).with_context(|| format!("catalog {}", cfg.catalog.display()))?;
    let building =
        BuildingModel::load(&cfg.geometry).with_context(|| format!("geometry {}", cfg.geometry.display()))?;
    let weather = WeatherSeries::parse_epw(&cfg.weather).with_context(|| format!("weather {}", cfg.weather.display()))?;
    let encoder = Encoder::new(&catalog, &building, cfg.scenario)?;
    let sim = SimOptions { schedule1: cfg.schedule1, ..SimOptions::default() };
    Ok(FenestrationProblem::new(
        encoder,
        building,
        Arc::new(weather),
        cfg.weather.clone(),
        cfg.fitness_config()?,
        sim,
        cfg.evaluator.clone(),
    ))
}

pub fn run(args: RunArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&args.config).map_err(config)?;
    apply_overrides(&mut cfg, &args).map_err(config)?;
    cfg.validate().map_err(config)?;
    let problem = load_problem(&cfg).map_err(config)?;
    let fitness = problem.fitness_config().clone();
    let spec = CampaignSpec {
        search: cfg.search.clone(),
        budget: cfg.budget,
        budget_mode: cfg.budget_mode,
        seeds: cfg.seeds(),
        parallel: args.parallel,
    };
    spec.validate().map_err(optimize)?;

    let records = run_campaign(&spec, &problem).map_err(optimize)?;

    let rows = solution_table(&problem, &records, cfg.top_k)?;
    let best_of_run = |i: usize| rows.iter().find(|r| r.summary.run == i && r.summary.rank == 1).cloned();
    let mut artifacts = Artifacts::default();
    let summaries = add_run_files(&mut artifacts, &records, best_of_run)?;

    let mut buf = Vec::new();
    write_solutions(&rows, &mut buf)?;
    artifacts.add("solutions.csv", buf);
    artifacts.add_json("solutions.json", &rows)?;

    if records.len() >= 2 {
        let names: Vec<String> = problem.encoder().layout.dims.iter().map(|d| d.name.clone()).collect();
        let entries = robustness(&names, &best_genomes(&problem, &records)?)?;
        artifacts.add("robustness.csv", csv_bytes(&entries)?);
    }

    let mut freq = Vec::new();
    if let Some(first) = rows.first() {
        for (field, _) in first.fields() {
            freq.extend(frequency_rows(&field, &frequency(&rows, &field)?));
        }
    }
    artifacts.add("frequency.csv", csv_bytes(&freq)?);

    let demands: Vec<Demands> = rows.iter().map(|r| Demands::from(&r.summary)).collect();
    let best: &SolutionRow = &rows[select_best(&demands, fitness.location.edh_limit(), fitness.location.edc_limit())?];
    artifacts.add_json("best_solution.json", best)?;

    let bests: Vec<SolutionRow> = (0..records.len()).filter_map(best_of_run).collect();
    let mut variability = BTreeMap::new();
    let columns: [(&str, fn(&SolutionRow) -> f64); 6] = [
        ("fitness", |r| r.summary.fitness),
        ("edh", |r| r.summary.edh),
        ("edc", |r| r.summary.edc),
        ("nct", |r| r.summary.nct),
        ("wwr_pct", |r| r.summary.wwr_pct),
        ("k", |r| r.summary.k),
    ];
    for (name, get) in columns {
        if let Some(v) = spread(&bests.iter().map(get).collect::<Vec<_>>()) {
            variability.insert(name.to_string(), v);
        }
    }

    let mut files = artifacts.names();
    files.sort();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        kind: "fenestration".into(),
        label: fitness.location.to_string().to_lowercase(),
        algorithm: spec.search.algorithm.to_string(),
        budget: spec.budget,
        budget_mode: spec.budget_mode,
        runs: summaries,
        cache: Some(problem.cache().stats()),
        best_solution: Some("best_solution.json".into()),
        variability,
        files,
        config: serde_json::to_value(&cfg)?,
    };
    let path = artifacts.write(&cfg.output, &manifest)?;
    let penalty_free = rows.iter().filter(|r| r.summary.rank == 1 && r.summary.penalty_free).count();
    println!(
        "{} runs, {} simulations, {} of {} run bests penalty-free; best {} fitness {:.4} (EDh {:.1}, EDc {:.1}, NCT {:.0})",
        records.len(),
        manifest.cache.map_or(0, |c| c.misses),
        penalty_free,
        records.len(),
        best.summary.label,
        best.summary.fitness,
        best.summary.edh,
        best.summary.edc,
        best.summary.nct,
    );
    println!("manifest: {}", path.display());
    Ok(())
}
