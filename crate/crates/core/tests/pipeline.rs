//! A short campaign on the bundled data, pushed through every analysis step.

use std::path::PathBuf;
use std::sync::Arc;

use fenopt::analysis::export::{read_solution_summaries, write_solutions};
use fenopt::analysis::{
    best_genomes, convergence, frequency, robustness, select_best, solution_table, Demands, SolutionRow,
};
use fenopt::building::BuildingModel;
use fenopt::campaign::{run_campaign, CampaignSpec, Evaluator, FenestrationProblem, SearchSettings};
use fenopt::catalog::Catalog;
use fenopt::encoding::{Encoder, Scenario};
use fenopt::fitness::{FitnessConfig, Location};
use fenopt::optimize::{BudgetMode, HybridConfig, RunRecord};
use fenopt::thermal::{SimOptions, WeatherSeries};

const RUNS: usize = 3;
const BUDGET: usize = 60;
const TOP_K: usize = 5;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")).join(rel)
}

fn campaign() -> (FenestrationProblem, Vec<RunRecord>) {
    let catalog = Catalog::load(data("catalog.json")).unwrap();
    let building = BuildingModel::load(data("building.json")).unwrap();
    let path = data("weather/madrid.epw");
    let weather = Arc::new(WeatherSeries::parse_epw(&path).unwrap());
    let encoder = Encoder::new(&catalog, &building, Scenario::S1).unwrap();
    let problem = FenestrationProblem::new(
        encoder,
        building,
        weather,
        path,
        FitnessConfig::preset(Location::Madrid),
        SimOptions::default(),
        Evaluator::Builtin,
    );
    let spec = CampaignSpec {
        search: SearchSettings {
            hybrid: HybridConfig { pop_size: 12, ..Default::default() },
            ..Default::default()
        },
        budget: BUDGET,
        budget_mode: BudgetMode::default(),
        seeds: CampaignSpec::seeds_from(7, RUNS),
        parallel: 1,
    };
    let records = run_campaign(&spec, &problem).unwrap();
    (problem, records)
}

#[test]
fn campaign_feeds_every_analysis() {
    let (problem, records) = campaign();
    assert_eq!(records.len(), RUNS);
    assert!(records.iter().all(|r| r.evaluations == BUDGET));

    let rows = solution_table(&problem, &records, TOP_K).unwrap();
    assert_eq!(rows.len(), RUNS * TOP_K);
    for run in 0..RUNS {
        let f: Vec<f64> = rows.iter().filter(|r| r.summary.run == run).map(|r| r.summary.fitness).collect();
        assert!(f.windows(2).all(|w| w[0] <= w[1]), "run {run}: {f:?}");
        assert_eq!(f[0], records[run].best_f);
    }

    // CSV summaries survive a round trip.
    let mut buf = Vec::new();
    write_solutions(&rows, &mut buf).unwrap();
    let back = read_solution_summaries(buf.as_slice()).unwrap();
    assert_eq!(back, rows.iter().map(|r| r.summary.clone()).collect::<Vec<_>>());

    for c in convergence(&records).unwrap() {
        assert!(c.q05 <= c.q25 && c.q25 <= c.median && c.median <= c.q75 && c.q75 <= c.q95, "{c:?}");
    }

    for (field, _) in rows[0].fields() {
        let hist = frequency(&rows, &field).unwrap();
        assert_eq!(hist.values().sum::<usize>(), rows.len(), "{field}");
    }

    let names: Vec<String> = problem.encoder().layout.dims.iter().map(|d| d.name.clone()).collect();
    let entries = robustness(&names, &best_genomes(&problem, &records).unwrap()).unwrap();
    for name in &names {
        let n: usize = entries.iter().filter(|e| &e.dimension == name).map(|e| e.count).sum();
        assert_eq!(n, RUNS, "{name}");
    }

    let pick = |rows: &[SolutionRow]| {
        let d: Vec<Demands> = rows.iter().map(|r| Demands::from(&r.summary)).collect();
        let loc = Location::Madrid;
        rows[select_best(&d, loc.edh_limit(), loc.edc_limit()).unwrap()].summary.label.clone()
    };
    let mut reversed = rows.clone();
    reversed.reverse();
    assert_eq!(pick(&rows), pick(&reversed));
}
