//! Entanglement-entropy comparison between targets and reconstructions.

use std::fs;
use std::path::Path;

use csv::StringRecord;
use qsnap_core::state::{half_chain_entropy, StateVector};
use serde::{Deserialize, Serialize};

use crate::cohort::CohortSummary;
use crate::emit::{fmt_opt, parse_field, parse_opt, write_csv, CsvRow};
use crate::error::Result;

/// Trials at or above this fidelity count as matched reconstructions.
pub const MATCH_FIDELITY: f64 = 0.99;
/// Histogram resolution of the distribution summary.
pub const ENTROPY_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    /// Position after sorting by target entropy.
    pub rank: usize,
    pub trial: usize,
    pub target: f64,
    pub reconstructed: Option<f64>,
    pub abs_diff: Option<f64>,
    pub fidelity: Option<f64>,
}

impl CsvRow for EntropyRow {
    const HEADER: &'static [&'static str] = &["rank", "trial", "target", "reconstructed", "abs_diff", "fidelity"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.rank.to_string(),
            self.trial.to_string(),
            self.target.to_string(),
            fmt_opt(&self.reconstructed),
            fmt_opt(&self.abs_diff),
            fmt_opt(&self.fidelity),
        ]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            rank: parse_field(f, 0, "rank")?,
            trial: parse_field(f, 1, "trial")?,
            target: parse_field(f, 2, "target")?,
            reconstructed: parse_opt(f, 3, "reconstructed")?,
            abs_diff: parse_opt(f, 4, "abs_diff")?,
            fidelity: parse_opt(f, 5, "fidelity")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBin {
    pub lower: f64,
    pub upper: f64,
    pub target_count: usize,
    pub reconstructed_count: usize,
}

impl CsvRow for EntropyBin {
    const HEADER: &'static [&'static str] = &["lower", "upper", "target_count", "reconstructed_count"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.lower.to_string(),
            self.upper.to_string(),
            self.target_count.to_string(),
            self.reconstructed_count.to_string(),
        ]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            lower: parse_field(f, 0, "lower")?,
            upper: parse_field(f, 1, "upper")?,
            target_count: parse_field(f, 2, "target_count")?,
            reconstructed_count: parse_field(f, 3, "reconstructed_count")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDistribution {
    pub bins: Vec<EntropyBin>,
    pub mean_target: Option<f64>,
    pub mean_reconstructed: Option<f64>,
    /// Trials with fidelity ≥ [`MATCH_FIDELITY`] and a pure reconstruction.
    pub matched: usize,
    pub max_abs_diff_matched: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyAnalysis {
    pub rows: Vec<EntropyRow>,
    pub distribution: EntropyDistribution,
}

fn entropy_of(interleaved: &[f64]) -> Result<f64> {
    Ok(half_chain_entropy(&StateVector::from_interleaved(interleaved)?)?)
}

fn histogram(values: &[f64], recon: &[f64], upper: f64) -> Vec<EntropyBin> {
    let width = upper / ENTROPY_BINS as f64;
    let bin = |v: f64| ((v / width) as usize).min(ENTROPY_BINS - 1);
    let mut bins: Vec<EntropyBin> = (0..ENTROPY_BINS)
        .map(|i| EntropyBin {
            lower: i as f64 * width,
            upper: (i + 1) as f64 * width,
            target_count: 0,
            reconstructed_count: 0,
        })
        .collect();
    for &v in values {
        bins[bin(v)].target_count += 1;
    }
    for &v in recon {
        bins[bin(v)].reconstructed_count += 1;
    }
    bins
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Recomputes half-chain entropies from the stored amplitudes of every trial
/// and compares target with reconstruction.
pub fn run_entropy_analysis(cohort: &CohortSummary) -> Result<EntropyAnalysis> {
    let mut rows = Vec::with_capacity(cohort.trials.len());
    for t in &cohort.trials {
        let target = entropy_of(&t.target)?;
        let reconstructed = t.reconstructed.as_deref().map(entropy_of).transpose()?;
        rows.push(EntropyRow {
            rank: 0,
            trial: t.trial,
            target,
            reconstructed,
            abs_diff: reconstructed.map(|r| (r - target).abs()),
            fidelity: t.final_fidelity,
        });
    }
    rows.sort_by(|a, b| a.target.total_cmp(&b.target).then(a.trial.cmp(&b.trial)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i;
    }

    let targets: Vec<f64> = rows.iter().map(|r| r.target).collect();
    let recons: Vec<f64> = rows.iter().filter_map(|r| r.reconstructed).collect();
    let matched: Vec<f64> = rows
        .iter()
        .filter(|r| r.fidelity.is_some_and(|f| f >= MATCH_FIDELITY))
        .filter_map(|r| r.abs_diff)
        .collect();
    // Half-chain entropy is bounded by the smaller half, ⌊n/2⌋ bits.
    let upper = ((cohort.spec.n_qubits / 2) as f64).max(1.0);
    let distribution = EntropyDistribution {
        bins: histogram(&targets, &recons, upper),
        mean_target: mean(&targets),
        mean_reconstructed: mean(&recons),
        matched: matched.len(),
        max_abs_diff_matched: matched.iter().copied().reduce(f64::max),
    };
    Ok(EntropyAnalysis { rows, distribution })
}

/// Writes `entropy.csv`, `entropy_hist.csv` and `entropy_summary.json`.
pub fn emit_entropy(analysis: &EntropyAnalysis, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("entropy.csv"), &analysis.rows)?;
    write_csv(&dir.join("entropy_hist.csv"), &analysis.distribution.bins)?;
    fs::write(dir.join("entropy_summary.json"), serde_json::to_string_pretty(&analysis.distribution)?)?;
    Ok(())
}
