//! Random-target cohorts: many independent reconstructions under one spec.

use std::time::Instant;

use qsnap_core::circuit::mottonen_prepare;
use qsnap_core::estimators::Reconstruction;
use qsnap_core::state::{half_chain_entropy, hilbert_schmidt_overlap, overlap_fidelity, random_pure_state, StateVector};
use qsnap_core::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{with_seed, ExperimentSpec};
use crate::runs::{reconstruct_known, KnownTargetRun, RunSettings};

/// Absolute tolerance when checking stored aggregates against recomputed ones.
const AGGREGATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Engine seed.
    pub seed: u64,
    pub oracle_seed: u64,
    /// Interleaved target amplitudes.
    pub target: Vec<f64>,
    /// Interleaved amplitudes of the reported candidate, when it is pure.
    pub reconstructed: Option<Vec<f64>>,
    /// Highest value of the judged trace.
    pub best_fidelity: Option<f64>,
    /// Exact fidelity of the reported candidate against the target.
    pub final_fidelity: Option<f64>,
    /// Highest raw oracle value.
    pub oracle_best: Option<f64>,
    pub epochs: usize,
    pub oracle_evals: u64,
    /// Epochs to each spec threshold on the judged trace; `None` if never reached.
    pub epochs_to: Vec<Option<usize>>,
    /// Oracle trace for exact oracles, exact-fidelity trace otherwise.
    pub judged_trace: Vec<f64>,
    pub oracle_trace: Vec<f64>,
    pub entropy_target: f64,
    pub entropy_reconstructed: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStats {
    pub threshold: f64,
    pub reached: usize,
    pub pass_rate: f64,
    /// Mean over the trials that reached the threshold.
    pub mean_epochs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyPair {
    pub trial: usize,
    pub target: f64,
    pub reconstructed: Option<f64>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialRecord>,
    pub mean_fidelity: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub thresholds: Vec<ThresholdStats>,
    pub entropy_pairs: Vec<EntropyPair>,
    /// Per-trial wall time; emitted separately so the summary stays reproducible.
    #[serde(skip)]
    pub wall_time_s: Vec<f64>,
}

struct Aggregates {
    mean_fidelity: Option<f64>,
    min_fidelity: Option<f64>,
    thresholds: Vec<ThresholdStats>,
    entropy_pairs: Vec<EntropyPair>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn aggregate(trials: &[TrialRecord], thresholds: &[f64]) -> Aggregates {
    let fids: Vec<f64> = trials.iter().filter_map(|t| t.best_fidelity).collect();
    let stats = thresholds
        .iter()
        .enumerate()
        .map(|(k, &threshold)| {
            let epochs: Vec<f64> =
                trials.iter().filter_map(|t| t.epochs_to.get(k).copied().flatten()).map(|e| e as f64).collect();
            ThresholdStats {
                threshold,
                reached: epochs.len(),
                pass_rate: if trials.is_empty() { 0.0 } else { epochs.len() as f64 / trials.len() as f64 },
                mean_epochs: mean(&epochs),
            }
        })
        .collect();
    Aggregates {
        mean_fidelity: mean(&fids),
        min_fidelity: fids.iter().copied().reduce(f64::min),
        thresholds: stats,
        entropy_pairs: trials
            .iter()
            .map(|t| EntropyPair {
                trial: t.trial,
                target: t.entropy_target,
                reconstructed: t.entropy_reconstructed,
                fidelity: t.final_fidelity,
            })
            .collect(),
    }
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= AGGREGATE_TOLERANCE,
        _ => false,
    }
}

impl CohortSummary {
    /// Builds a summary whose aggregates are computed from `trials`.
    pub fn from_trials(spec: ExperimentSpec, trials: Vec<TrialRecord>) -> Self {
        let agg = aggregate(&trials, &spec.thresholds);
        Self {
            spec,
            trials,
            mean_fidelity: agg.mean_fidelity,
            min_fidelity: agg.min_fidelity,
            thresholds: agg.thresholds,
            entropy_pairs: agg.entropy_pairs,
            wall_time_s: Vec::new(),
        }
    }

    /// Recomputes every aggregate from the trial records and compares.
    pub fn verify(&self) -> Result<()> {
        let fail = |what: &str| Err(HarnessError::Inconsistent(format!("stored {what} disagrees with trial records")));
        if self.trials.iter().any(|t| t.epochs_to.len() != self.spec.thresholds.len()) {
            return fail("threshold count");
        }
        let agg = aggregate(&self.trials, &self.spec.thresholds);
        if !close(agg.mean_fidelity, self.mean_fidelity) {
            return fail("mean fidelity");
        }
        if !close(agg.min_fidelity, self.min_fidelity) {
            return fail("min fidelity");
        }
        if agg.thresholds.len() != self.thresholds.len() {
            return fail("threshold table");
        }
        for (a, b) in agg.thresholds.iter().zip(&self.thresholds) {
            if a.threshold != b.threshold
                || a.reached != b.reached
                || !close(Some(a.pass_rate), Some(b.pass_rate))
                || !close(a.mean_epochs, b.mean_epochs)
            {
                return fail("threshold statistics");
            }
        }
        if agg.entropy_pairs != self.entropy_pairs {
            return fail("entropy pairs");
        }
        Ok(())
    }

    /// Statistics for `threshold`, if the spec tracked it.
    pub fn threshold(&self, threshold: f64) -> Option<&ThresholdStats> {
        self.thresholds.iter().find(|s| s.threshold == threshold)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Exact fidelity of a reconstruction against a pure target.
pub fn pure_target_fidelity(recon: &Reconstruction, target: &StateVector) -> f64 {
    let value = match recon.state() {
        Some(s) => overlap_fidelity(&s, target),
        None => hilbert_schmidt_overlap(&recon.density(), &target.density()),
    };
    value.unwrap_or(0.0)
}

/// Seeds for one trial: target draw, oracle, engine.
fn trial_seeds(root: u64, trial: usize) -> (Rng, u64, u64) {
    let mut rng = Rng::new(root).split(trial as u64);
    let target_rng = rng.fork();
    let oracle_seed = rng.next_u64();
    let engine_seed = rng.next_u64();
    (target_rng, oracle_seed, engine_seed)
}

fn fill_from_run(record: &mut TrialRecord, spec: &ExperimentSpec, run: KnownTargetRun) {
    record.epochs_to = spec.thresholds.iter().map(|&t| run.epochs_to(t)).collect();
    record.best_fidelity = run.best();
    record.final_fidelity = Some(run.final_fidelity);
    let report = run.report;
    record.oracle_best = Some(report.best_fidelity);
    record.epochs = report.epochs;
    record.oracle_evals = report.oracle_evals;
    if let Some(state) = report.candidate.as_ref().and_then(|c| c.state()) {
        record.entropy_reconstructed = half_chain_entropy(&state).ok();
        record.reconstructed = Some(state.to_interleaved());
    }
    record.judged_trace = run.judged;
    record.oracle_trace = report.fidelity_trace;
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> (TrialRecord, f64) {
    let start = Instant::now();
    let (mut target_rng, oracle_seed, seed) = trial_seeds(spec.seed, trial);
    let target: StateVector = random_pure_state(spec.n_qubits, &mut target_rng).expect("spec validated");
    let mut record = TrialRecord {
        trial,
        seed,
        oracle_seed,
        target: target.to_interleaved(),
        reconstructed: None,
        best_fidelity: None,
        final_fidelity: None,
        oracle_best: None,
        epochs: 0,
        oracle_evals: 0,
        epochs_to: vec![None; spec.thresholds.len()],
        judged_trace: Vec::new(),
        oracle_trace: Vec::new(),
        entropy_target: half_chain_entropy(&target).unwrap_or(0.0),
        entropy_reconstructed: None,
        error: None,
    };
    let settings = RunSettings {
        engine: with_seed(&spec.engine, seed),
        representation: spec.representation,
        noise: spec.noise.clone(),
        shots: spec.shots,
    };
    match mottonen_prepare(&target).map_err(HarnessError::from).and_then(|prep| reconstruct_known(&prep, &settings, oracle_seed)) {
        Ok(run) => fill_from_run(&mut record, spec, run),
        Err(e) => record.error = Some(e.to_string()),
    }
    (record, start.elapsed().as_secs_f64())
}

/// Runs every trial of `spec` in parallel and writes the outputs when the
/// spec names a directory. Per-trial failures are recorded, not raised.
pub fn run_cohort(spec: &ExperimentSpec) -> Result<CohortSummary> {
    spec.validate()?;
    let results: Vec<(TrialRecord, f64)> = (0..spec.n_trials).into_par_iter().map(|t| run_trial(spec, t)).collect();
    let (trials, times): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut summary = CohortSummary::from_trials(spec.clone(), trials);
    summary.wall_time_s = times;
    if let Some(dir) = &spec.out_dir {
        crate::emit::emit_cohort(&summary, dir)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: usize, best: Option<f64>, epochs_to: Vec<Option<usize>>) -> TrialRecord {
        TrialRecord {
            trial,
            seed: 0,
            oracle_seed: 0,
            target: vec![1.0, 0.0, 0.0, 0.0],
            reconstructed: None,
            best_fidelity: best,
            final_fidelity: best,
            oracle_best: best,
            epochs: 3,
            oracle_evals: 3,
            epochs_to,
            judged_trace: vec![],
            oracle_trace: vec![],
            entropy_target: 0.0,
            entropy_reconstructed: None,
            error: None,
        }
    }

    #[test]
    fn na_excluded_from_mean_epochs() {
        use qsnap_core::estimators::{Method, Representation};
        let spec = ExperimentSpec::new(Method::Qeswap, Representation::StateVector, 1);
        let trials = vec![
            record(0, Some(0.999), vec![Some(2), Some(4)]),
            record(1, Some(0.96), vec![Some(6), None]),
            record(2, None, vec![None, None]),
        ];
        let s = CohortSummary::from_trials(spec, trials);
        assert_eq!(s.threshold(0.95).unwrap().mean_epochs, Some(4.0));
        assert_eq!(s.threshold(0.99).unwrap().mean_epochs, Some(4.0));
        assert_eq!(s.threshold(0.99).unwrap().reached, 1);
        assert!((s.threshold(0.95).unwrap().pass_rate - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.min_fidelity, Some(0.96));
        assert!((s.mean_fidelity.unwrap() - 0.9795).abs() < 1e-15);
        s.verify().unwrap();

        let mut bad = s.clone();
        bad.thresholds[0].reached = 1;
        assert!(bad.verify().is_err());
        let mut bad = s;
        bad.mean_fidelity = Some(0.5);
        assert!(bad.verify().is_err());
    }

    #[test]
    fn seeds_differ_per_trial() {
        let (_, o0, e0) = trial_seeds(1, 0);
        let (_, o1, e1) = trial_seeds(1, 1);
        assert_ne!((o0, e0), (o1, e1));
        assert_eq!(trial_seeds(1, 0).1, o0);
    }
}
