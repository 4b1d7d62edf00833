//! Mixed-target diagnostic: what a SWAP-test signal can and cannot recover.
//!
//! On a mixed target σ a SWAP test reports `Tr(ρσ)`, which is maximized by a
//! pure ρ on the dominant eigenvector, not by ρ = σ. The diagnostic optimizes
//! a density candidate against that signal and, separately, against the
//! Uhlmann fidelity (which needs the target matrix and is therefore only
//! available in simulation), then scores both outcomes by Uhlmann fidelity.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use csv::StringRecord;
use qsnap_core::circuit::mottonen_prepare;
use qsnap_core::estimators::{
    reconstruct, Candidate, EngineConfig, FidelityOracle, GradientConfig, OracleMode, Representation, SwapTestOracle,
};
use qsnap_core::state::{random_pure_state, uhlmann_fidelity, DensityMatrix, StateVector};
use qsnap_core::{Complex64, Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emit::{fmt_opt, parse_field, parse_opt, write_csv, CsvRow};
use crate::error::{invalid, Result};
use crate::experiment::with_seed;

/// Uhlmann fidelity at or below which the signal-driven run has plateaued.
pub const PLATEAU_BOUND: f64 = 0.95;
/// Uhlmann fidelity the oracle-driven run must reach.
pub const RECOVERY_BOUND: f64 = 0.99;

/// Oracle returning the Uhlmann fidelity against a known density matrix.
#[derive(Debug)]
pub struct UhlmannOracle {
    target: DensityMatrix,
    evaluations: AtomicU64,
}

impl UhlmannOracle {
    pub fn new(target: DensityMatrix) -> Self {
        Self { target, evaluations: AtomicU64::new(0) }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::SeqCst)
    }
}

impl FidelityOracle for UhlmannOracle {
    fn evaluate(&self, candidate: &Candidate) -> qsnap_core::Result<f64> {
        self.evaluations.fetch_add(1, Ordering::SeqCst);
        let rho = match candidate {
            Candidate::State(s) => s.density(),
            Candidate::Density(d) => d.clone(),
        };
        uhlmann_fidelity(&rho, &self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedDiagnosticConfig {
    pub n_qubits: usize,
    pub trials: usize,
    /// 1 for pure targets, 2 for two-component mixtures.
    pub rank: usize,
    /// Weight of the dominant component, drawn uniformly from this range.
    pub lambda_range: (f64, f64),
    pub engine: EngineConfig,
    pub seed: u64,
}

impl Default for MixedDiagnosticConfig {
    fn default() -> Self {
        Self {
            n_qubits: 2,
            trials: 10,
            rank: 2,
            lambda_range: (0.5, 0.9),
            engine: EngineConfig::Gradient(GradientConfig { epochs: 300, ..GradientConfig::default() }),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedTrial {
    pub trial: usize,
    pub lambda: f64,
    pub purity: f64,
    /// Best `Tr(ρσ)` seen by the signal-driven run.
    pub signal_best: Option<f64>,
    /// Uhlmann fidelity of the signal-driven result.
    pub signal_uhlmann: Option<f64>,
    /// Uhlmann fidelity of the Uhlmann-driven result.
    pub uhlmann_driven: Option<f64>,
    pub error: Option<String>,
}

impl CsvRow for MixedTrial {
    const HEADER: &'static [&'static str] =
        &["trial", "lambda", "purity", "signal_best", "signal_uhlmann", "uhlmann_driven", "error"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.lambda.to_string(),
            self.purity.to_string(),
            fmt_opt(&self.signal_best),
            fmt_opt(&self.signal_uhlmann),
            fmt_opt(&self.uhlmann_driven),
            fmt_opt(&self.error),
        ]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            trial: parse_field(f, 0, "trial")?,
            lambda: parse_field(f, 1, "lambda")?,
            purity: parse_field(f, 2, "purity")?,
            signal_best: parse_opt(f, 3, "signal_best")?,
            signal_uhlmann: parse_opt(f, 4, "signal_uhlmann")?,
            uhlmann_driven: parse_opt(f, 5, "uhlmann_driven")?,
            error: parse_opt(f, 6, "error")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSummary {
    pub trials: usize,
    /// Signal-driven runs ending at Uhlmann fidelity ≤ [`PLATEAU_BOUND`].
    pub plateaued: usize,
    /// Uhlmann-driven runs reaching [`RECOVERY_BOUND`].
    pub recovered: usize,
    pub mean_signal_uhlmann: Option<f64>,
    pub mean_uhlmann_driven: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedDiagnostic {
    pub config: MixedDiagnosticConfig,
    pub trials: Vec<MixedTrial>,
    pub summary: MixedSummary,
}

/// `λ|a⟩⟨a| + (1−λ)|b⟩⟨b|` with `b ⟂ a`, plus the two components.
fn draw_target(config: &MixedDiagnosticConfig, rng: &mut Rng) -> Result<(f64, Vec<(f64, StateVector)>)> {
    let a: StateVector = random_pure_state(config.n_qubits, rng)?;
    if config.rank == 1 {
        return Ok((1.0, vec![(1.0, a)]));
    }
    let raw: StateVector = random_pure_state(config.n_qubits, rng)?;
    let ip = a.inner(&raw)?;
    let amps: Vec<Complex64> = raw.amplitudes().iter().zip(a.amplitudes()).map(|(x, y)| x - y * ip).collect();
    let b = StateVector::from_amplitudes(amps)?;
    let (lo, hi) = config.lambda_range;
    let lambda = lo + (hi - lo) * rng.uniform();
    Ok((lambda, vec![(lambda, a), (1.0 - lambda, b)]))
}

fn run_trial(config: &MixedDiagnosticConfig, trial: usize) -> Result<MixedTrial> {
    let mut rng = Rng::new(config.seed).split(trial as u64);
    let (lambda, components) = draw_target(config, &mut rng)?;
    let sigma = DensityMatrix::mixture(&components)?;
    let engine = with_seed(&config.engine, rng.next_u64());
    let ensemble = components.iter().map(|(w, s)| Ok((*w, mottonen_prepare(s)?))).collect::<Result<Vec<_>>>()?;
    let signal = SwapTestOracle::ensemble(ensemble, OracleMode::Analytic, rng.next_u64())?;
    let uhlmann = UhlmannOracle::new(sigma.clone());

    let score = |report: &qsnap_core::estimators::ReconstructionReport| {
        report.candidate.as_ref().map(|c| uhlmann_fidelity(&c.density(), &sigma)).transpose()
    };
    let a = reconstruct(Representation::Density, &signal, config.n_qubits, &engine, None)?;
    let b = reconstruct(Representation::Density, &uhlmann, config.n_qubits, &engine, None)?;
    Ok(MixedTrial {
        trial,
        lambda,
        purity: sigma.purity(),
        signal_best: Some(a.best_fidelity),
        signal_uhlmann: score(&a)?,
        uhlmann_driven: score(&b)?,
        error: None,
    })
}

fn summarize(trials: &[MixedTrial]) -> MixedSummary {
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    MixedSummary {
        trials: trials.len(),
        plateaued: trials.iter().filter(|t| t.signal_uhlmann.is_some_and(|f| f <= PLATEAU_BOUND)).count(),
        recovered: trials.iter().filter(|t| t.uhlmann_driven.is_some_and(|f| f >= RECOVERY_BOUND)).count(),
        mean_signal_uhlmann: mean(trials.iter().filter_map(|t| t.signal_uhlmann).collect()),
        mean_uhlmann_driven: mean(trials.iter().filter_map(|t| t.uhlmann_driven).collect()),
    }
}

/// Runs both arms on `config.trials` random targets in parallel.
pub fn run_mixed_state_diagnostic(config: &MixedDiagnosticConfig) -> Result<MixedDiagnostic> {
    if config.trials == 0 || !(1..=2).contains(&config.rank) {
        return invalid("mixed diagnostic needs at least one trial and rank 1 or 2");
    }
    let (lo, hi) = config.lambda_range;
    if !(0.5 <= lo && lo <= hi && hi < 1.0) {
        return invalid("lambda range must satisfy 0.5 ≤ lo ≤ hi < 1");
    }
    Representation::Density.raw_len(config.n_qubits)?;
    let trials: Vec<MixedTrial> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            run_trial(config, t).unwrap_or_else(|e| MixedTrial {
                trial: t,
                lambda: f64::NAN,
                purity: f64::NAN,
                signal_best: None,
                signal_uhlmann: None,
                uhlmann_driven: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let summary = summarize(&trials);
    Ok(MixedDiagnostic { config: config.clone(), trials, summary })
}

/// Writes `mixed.csv` and `mixed_summary.json`.
pub fn emit_mixed(diag: &MixedDiagnostic, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("mixed.csv"), &diag.trials)?;
    fs::write(dir.join("mixed_summary.json"), serde_json::to_string_pretty(&diag.summary)?)?;
    Ok(())
}
