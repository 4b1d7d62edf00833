//! Single reconstructions against a known target preparation.

use qsnap_core::circuit::{execute_statevector, QuantumCircuit};
use qsnap_core::estimators::{reconstruct, EngineConfig, Method, Representation, ReconstructionReport};
use qsnap_core::state::StateVector;
use serde::{Deserialize, Serialize};

use crate::cohort::pure_target_fidelity;
use crate::error::Result;
use crate::experiment::{build_oracle, default_engine, with_stop, NoiseSetting};

/// Engine, decoder and oracle settings shared by the single-target runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub engine: EngineConfig,
    pub representation: Representation,
    pub noise: NoiseSetting,
    pub shots: Option<u64>,
}

impl RunSettings {
    pub fn new(method: Method, representation: Representation) -> Self {
        Self { engine: default_engine(method), representation, noise: NoiseSetting::Off, shots: None }
    }

    /// Sets the noise regime and the matching early-stop threshold.
    pub fn with_noise(mut self, noise: NoiseSetting) -> Self {
        self.engine = with_stop(&self.engine, noise.default_stop());
        self.noise = noise;
        self
    }

    pub fn oracle_is_exact(&self) -> bool {
        !self.noise.is_on() && self.shots.is_none()
    }
}

/// A finished run with the trace it is judged on.
#[derive(Debug, Clone)]
pub struct KnownTargetRun {
    pub report: ReconstructionReport,
    /// Oracle trace for exact oracles, exact-fidelity trace otherwise.
    pub judged: Vec<f64>,
    /// Exact fidelity of the reported candidate.
    pub final_fidelity: f64,
}

impl KnownTargetRun {
    pub fn best(&self) -> Option<f64> {
        self.judged.iter().copied().reduce(f64::max)
    }

    pub fn epochs_to(&self, threshold: f64) -> Option<usize> {
        ReconstructionReport::epochs_to(&self.judged, threshold)
    }
}

/// Reconstructs the state prepared by `prep` from `|0…0⟩`. The exact target
/// is used only for validation, never by the engine.
pub fn reconstruct_known(prep: &QuantumCircuit, settings: &RunSettings, oracle_seed: u64) -> Result<KnownTargetRun> {
    let target: StateVector = execute_statevector(prep, &StateVector::zero(prep.n_qubits())?)?;
    let oracle = build_oracle(prep.clone(), &settings.noise, settings.shots, oracle_seed)?;
    let validator = |r: &_| pure_target_fidelity(r, &target);
    let report = reconstruct(settings.representation, &oracle, prep.n_qubits(), &settings.engine, Some(&validator))?;
    let judged = if settings.oracle_is_exact() { report.fidelity_trace.clone() } else { report.validation_trace.clone() };
    let final_fidelity = report.candidate.as_ref().map_or(0.0, |c| pure_target_fidelity(c, &target));
    Ok(KnownTargetRun { report, judged, final_fidelity })
}
