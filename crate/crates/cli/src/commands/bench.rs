use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use fenopt::campaign::{run_campaign, Algorithm, CampaignSpec, SearchSettings};
use fenopt::optimize::bench::{Rastrigin, Sphere};
use fenopt::optimize::{BudgetMode, Objective};

use super::{add_run_files, spread};
use crate::error::{config, optimize};
use crate::output::{Artifacts, Manifest, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Function {
    Sphere,
    Rastrigin,
}

impl Function {
    fn name(self) -> &'static str {
        match self {
            Function::Sphere => "sphere",
            Function::Rastrigin => "rastrigin",
        }
    }

    pub fn half_width(self) -> f64 {
        match self {
            Function::Sphere => 100.0,
            Function::Rastrigin => 5.12,
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub function: Function,
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    #[arg(long, default_value_t = 20_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 15)]
    pub runs: usize,
    #[arg(long, default_value = "hybrid")]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = 1)]
    pub base_seed: u64,
    /// Seed of the shift vector; campaigns to be compared must share it.
    #[arg(long, default_value_t = 0)]
    pub instance: u64,
    /// Largest shift per coordinate as a fraction of the half width.
    #[arg(long, default_value_t = 0.8)]
    pub shift: f64,
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn bench(args: BenchArgs) -> Result<()> {
    if args.dim == 0 || !(0.0..=1.0).contains(&args.shift) {
        return Err(config(anyhow::anyhow!("dimension must be positive and shift within [0, 1]")));
    }
    let hw = args.function.half_width();
    let problem: Box<dyn Objective> = match args.function {
        Function::Sphere => Box::new(Sphere::new(args.dim, args.shift * hw, hw, args.instance)),
        Function::Rastrigin => Box::new(Rastrigin::new(args.dim, args.shift * hw, hw, args.instance)),
    };
    let spec = CampaignSpec {
        search: SearchSettings { algorithm: args.algorithm, ..Default::default() },
        budget: args.budget,
        budget_mode: BudgetMode::DistinctKeys,
        seeds: CampaignSpec::seeds_from(args.base_seed, args.runs),
        parallel: args.parallel,
    };
    let records = run_campaign(&spec, problem.as_ref()).map_err(optimize)?;

    let mut artifacts = Artifacts::default();
    let summaries = add_run_files(&mut artifacts, &records, |_| None)?;
    let finals: Vec<f64> = records.iter().map(|r| r.best_f).collect();
    let variability: BTreeMap<String, _> = spread(&finals).map(|v| ("best_f".to_string(), v)).into_iter().collect();
    let mut files = artifacts.names();
    files.sort();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        kind: "benchmark".into(),
        label: format!("{}-d{}", args.function.name(), args.dim),
        algorithm: args.algorithm.to_string(),
        budget: spec.budget,
        budget_mode: spec.budget_mode,
        runs: summaries,
        cache: None,
        best_solution: None,
        variability,
        files,
        config: serde_json::json!({
            "function": args.function.name(),
            "dim": args.dim,
            "instance": args.instance,
            "shift": args.shift,
            "half_width": hw,
            "seeds": spec.seeds,
            "search": spec.search,
        }),
    };
    let path = artifacts.write(&args.output, &manifest)?;
    let mut sorted = finals;
    sorted.sort_by(f64::total_cmp);
    println!(
        "{} on {}: {} runs, median best {:.6e}",
        args.algorithm,
        manifest.label,
        sorted.len(),
        fenopt::analysis::quantile(&sorted, 0.5)
    );
    println!("manifest: {}", path.display());
    Ok(())
}
