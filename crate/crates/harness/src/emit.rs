//! CSV/JSON emission and loading.
//!
//! Every table has a fixed header. Missing values are written as `NA`, and
//! floats use the shortest representation that parses back exactly, so each
//! table round-trips through [`read_csv`] with equality.
//!
//! Cohort directory layout:
//!
//! | file             | columns / content                                         |
//! |------------------|-----------------------------------------------------------|
//! | `summary.json`   | [`CohortSummary`] (deterministic given the seed)           |
//! | `trials.csv`     | [`TrialRow::HEADER`]                                       |
//! | `thresholds.csv` | `trial, threshold, epochs_to`                              |
//! | `traces.csv`     | `trial, epoch, fidelity` (judged trace, 1-based epochs)    |
//! | `timing.json`    | per-trial wall time in seconds; the only varying file     |

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;
use serde_json::json;

use crate::cohort::CohortSummary;
use crate::error::{HarnessError, Result};

pub const NA: &str = "NA";

/// A row of a fixed-schema CSV table.
pub trait CsvRow: Sized {
    const HEADER: &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &StringRecord) -> Result<Self>;
}

pub fn fmt_opt<T: Display>(value: &Option<T>) -> String {
    value.as_ref().map_or_else(|| NA.to_owned(), ToString::to_string)
}

fn bad(field: &str, raw: &str) -> HarnessError {
    HarnessError::Inconsistent(format!("cannot parse {field} from {raw:?}"))
}

pub fn parse_field<T: FromStr>(fields: &StringRecord, index: usize, name: &str) -> Result<T> {
    let raw = fields.get(index).ok_or_else(|| bad(name, ""))?;
    raw.parse().map_err(|_| bad(name, raw))
}

pub fn parse_opt<T: FromStr>(fields: &StringRecord, index: usize, name: &str) -> Result<Option<T>> {
    match fields.get(index) {
        Some(NA) => Ok(None),
        _ => parse_field(fields, index, name).map(Some),
    }
}

/// Writes `rows` under the table header; an empty slice gives a header-only file.
pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(R::HEADER)?;
    for row in rows {
        w.write_record(row.to_fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: CsvRow>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(HarnessError::Inconsistent(format!("unexpected header in {}", path.display())));
    }
    r.records().map(|rec| R::from_fields(&rec?)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub best_fidelity: Option<f64>,
    pub final_fidelity: Option<f64>,
    pub oracle_best: Option<f64>,
    pub epochs: usize,
    pub oracle_evals: u64,
    pub entropy_target: f64,
    pub entropy_reconstructed: Option<f64>,
    pub error: Option<String>,
}

impl CsvRow for TrialRow {
    const HEADER: &'static [&'static str] = &[
        "trial",
        "seed",
        "best_fidelity",
        "final_fidelity",
        "oracle_best",
        "epochs",
        "oracle_evals",
        "entropy_target",
        "entropy_reconstructed",
        "error",
    ];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.seed.to_string(),
            fmt_opt(&self.best_fidelity),
            fmt_opt(&self.final_fidelity),
            fmt_opt(&self.oracle_best),
            self.epochs.to_string(),
            self.oracle_evals.to_string(),
            self.entropy_target.to_string(),
            fmt_opt(&self.entropy_reconstructed),
            fmt_opt(&self.error),
        ]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            trial: parse_field(f, 0, "trial")?,
            seed: parse_field(f, 1, "seed")?,
            best_fidelity: parse_opt(f, 2, "best_fidelity")?,
            final_fidelity: parse_opt(f, 3, "final_fidelity")?,
            oracle_best: parse_opt(f, 4, "oracle_best")?,
            epochs: parse_field(f, 5, "epochs")?,
            oracle_evals: parse_field(f, 6, "oracle_evals")?,
            entropy_target: parse_field(f, 7, "entropy_target")?,
            entropy_reconstructed: parse_opt(f, 8, "entropy_reconstructed")?,
            error: parse_opt(f, 9, "error")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub trial: usize,
    pub threshold: f64,
    pub epochs_to: Option<usize>,
}

impl CsvRow for ThresholdRow {
    const HEADER: &'static [&'static str] = &["trial", "threshold", "epochs_to"];

    fn to_fields(&self) -> Vec<String> {
        vec![self.trial.to_string(), self.threshold.to_string(), fmt_opt(&self.epochs_to)]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            trial: parse_field(f, 0, "trial")?,
            threshold: parse_field(f, 1, "threshold")?,
            epochs_to: parse_opt(f, 2, "epochs_to")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub trial: usize,
    pub epoch: usize,
    pub fidelity: f64,
}

impl CsvRow for TraceRow {
    const HEADER: &'static [&'static str] = &["trial", "epoch", "fidelity"];

    fn to_fields(&self) -> Vec<String> {
        vec![self.trial.to_string(), self.epoch.to_string(), self.fidelity.to_string()]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            trial: parse_field(f, 0, "trial")?,
            epoch: parse_field(f, 1, "epoch")?,
            fidelity: parse_field(f, 2, "fidelity")?,
        })
    }
}

pub fn trial_rows(summary: &CohortSummary) -> Vec<TrialRow> {
    summary
        .trials
        .iter()
        .map(|t| TrialRow {
            trial: t.trial,
            seed: t.seed,
            best_fidelity: t.best_fidelity,
            final_fidelity: t.final_fidelity,
            oracle_best: t.oracle_best,
            epochs: t.epochs,
            oracle_evals: t.oracle_evals,
            entropy_target: t.entropy_target,
            entropy_reconstructed: t.entropy_reconstructed,
            error: t.error.clone(),
        })
        .collect()
}

pub fn threshold_rows(summary: &CohortSummary) -> Vec<ThresholdRow> {
    summary
        .trials
        .iter()
        .flat_map(|t| {
            summary.spec.thresholds.iter().zip(&t.epochs_to).map(|(&threshold, &epochs_to)| ThresholdRow {
                trial: t.trial,
                threshold,
                epochs_to,
            })
        })
        .collect()
}

pub fn trace_rows(summary: &CohortSummary) -> Vec<TraceRow> {
    summary
        .trials
        .iter()
        .flat_map(|t| {
            t.judged_trace.iter().enumerate().map(|(i, &fidelity)| TraceRow { trial: t.trial, epoch: i + 1, fidelity })
        })
        .collect()
}

/// Writes the cohort directory described in the module docs.
pub fn emit_cohort(summary: &CohortSummary, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), summary.to_json())?;
    write_csv(&dir.join("trials.csv"), &trial_rows(summary))?;
    write_csv(&dir.join("thresholds.csv"), &threshold_rows(summary))?;
    write_csv(&dir.join("traces.csv"), &trace_rows(summary))?;
    let timing = json!({ "wall_time_s": summary.wall_time_s });
    fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)?)?;
    Ok(())
}

/// Loads a cohort directory, checking the stored aggregates and the CSV
/// tables against the trial records.
pub fn load_cohort(dir: &Path) -> Result<CohortSummary> {
    let summary: CohortSummary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    summary.verify()?;
    let consistent = read_csv::<TrialRow>(&dir.join("trials.csv"))? == trial_rows(&summary)
        && read_csv::<ThresholdRow>(&dir.join("thresholds.csv"))? == threshold_rows(&summary)
        && read_csv::<TraceRow>(&dir.join("traces.csv"))? == trace_rows(&summary);
    if !consistent {
        return Err(HarnessError::Inconsistent("CSV tables disagree with summary.json".into()));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn na_round_trip() {
        let rows = vec![
            ThresholdRow { trial: 0, threshold: 0.99, epochs_to: None },
            ThresholdRow { trial: 1, threshold: 0.1 + 0.2, epochs_to: Some(4) },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &rows).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "trial,threshold,epochs_to\n0,0.99,NA\n1,0.30000000000000004,4\n");
        assert_eq!(read_csv::<ThresholdRow>(&p).unwrap(), rows);
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv::<TrialRow>(&p, &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 1);
        assert!(read_csv::<TrialRow>(&p).unwrap().is_empty());
    }

    #[test]
    fn wrong_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        fs::write(&p, "trial,epoch\n0,1\n").unwrap();
        assert!(read_csv::<TraceRow>(&p).is_err());
    }
}
