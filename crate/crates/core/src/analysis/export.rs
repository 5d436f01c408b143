//! CSV forms of the analysis tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, FieldValue, SolutionRow, SolutionSummary};

fn csv_err(e: csv::Error) -> AnalysisError {
    AnalysisError::Csv(e.to_string())
}

/// Writes `rows` with a header taken from the field names of `T`.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AnalysisError::Csv(e.to_string()))
}

pub fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>, AnalysisError> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_err)).collect()
}

const SUMMARY_COLUMNS: [&str; 18] = [
    "label",
    "design_id",
    "run",
    "seed",
    "rank",
    "fitness",
    "edh",
    "edc",
    "ed_total",
    "nct",
    "wwr_pct",
    "k",
    "q_sol_jul",
    "p_solar",
    "p_window_u",
    "p_k",
    "p_min_glazing",
    "penalty_free",
];

fn summary_record(s: &SolutionSummary) -> Vec<String> {
    vec![
        s.label.clone(),
        s.design_id.clone(),
        s.run.to_string(),
        s.seed.to_string(),
        s.rank.to_string(),
        s.fitness.to_string(),
        s.edh.to_string(),
        s.edc.to_string(),
        s.ed_total.to_string(),
        s.nct.to_string(),
        s.wwr_pct.to_string(),
        s.k.to_string(),
        s.q_sol_jul.to_string(),
        s.p_solar.to_string(),
        s.p_window_u.to_string(),
        s.p_k.to_string(),
        s.p_min_glazing.to_string(),
        s.penalty_free.to_string(),
    ]
}

/// Summary columns followed by every design field. Absent devices are
/// empty cells.
pub fn write_solutions<W: Write>(rows: &[SolutionRow], out: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    let field_names: Vec<String> = rows.first().map(|r| r.fields().into_iter().map(|(n, _)| n).collect()).unwrap_or_default();
    let mut header: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(field_names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = summary_record(&r.summary);
        let fields = r.fields();
        if fields.len() != field_names.len() {
            return Err(AnalysisError::Csv(format!("row {} has a different design layout", r.summary.label)));
        }
        rec.extend(fields.into_iter().map(|(_, v)| match v {
            FieldValue::Text(s) => s,
            FieldValue::Number(x) => x.to_string(),
            FieldValue::Absent => String::new(),
        }));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AnalysisError::Csv(e.to_string()))
}

/// Reads the summary columns of a solutions table.
pub fn read_solution_summaries<R: Read>(input: R) -> Result<Vec<SolutionSummary>, AnalysisError> {
    read_rows(input)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub field: String,
    pub value: String,
    pub count: usize,
}

pub fn frequency_rows(field: &str, hist: &BTreeMap<String, usize>) -> Vec<FrequencyRow> {
    hist.iter().map(|(v, &count)| FrequencyRow { field: field.to_string(), value: v.clone(), count }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ConvergenceRow, RobustnessEntry};

    #[test]
    fn convergence_round_trip() {
        let rows = vec![
            ConvergenceRow { evaluation: 1, median: 2.5, q25: 2.0, q75: 3.0, q05: 1.0, q95: 4.0 },
            ConvergenceRow { evaluation: 2, median: 0.1, q25: 0.1, q75: 0.1, q05: 0.1, q95: 0.1 },
        ];
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("evaluation,median,q25,q75,q05,q95\n"));
        assert_eq!(read_rows::<ConvergenceRow, _>(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn robustness_and_frequency_round_trip() {
        let rows = vec![RobustnessEntry { dimension: "North.control".into(), value: 3.5, count: 9 }];
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        assert_eq!(read_rows::<RobustnessEntry, _>(buf.as_slice()).unwrap(), rows);

        let hist = BTreeMap::from([("absent".to_string(), 2), ("0.3".to_string(), 1)]);
        let f = frequency_rows("South.overhang.depth", &hist);
        let mut buf = Vec::new();
        write_rows(&f, &mut buf).unwrap();
        assert_eq!(read_rows::<FrequencyRow, _>(buf.as_slice()).unwrap(), f);
    }
}
