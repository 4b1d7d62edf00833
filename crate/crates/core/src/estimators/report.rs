use serde::{Deserialize, Serialize};

use super::decode::Reconstruction;
use super::{Method, Representation};

/// Outcome of one reconstruction run. Serializes to the stable JSON schema;
/// the decoded candidate and any validation trace stay in memory only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub method: Method,
    pub representation: Representation,
    pub n_qubits: usize,
    pub best_fidelity: f64,
    pub epochs: usize,
    pub oracle_evals: u64,
    /// Per-epoch oracle fidelity (gradient: the forward candidate; QESwap:
    /// the population maximum).
    pub fidelity_trace: Vec<f64>,
    pub wall_time_s: f64,
    /// Set when the oracle value is `Tr(ρσ)` rather than a pure-state fidelity.
    pub mixed_state_flag: bool,
    pub seed: u64,
    /// Best-fidelity candidate seen.
    #[serde(skip)]
    pub candidate: Option<Reconstruction>,
    /// Raw parameters of `candidate`.
    #[serde(skip)]
    pub best_raw: Vec<f64>,
    /// Externally validated fidelity per epoch, when a validator was given.
    /// Gradient: the forward candidate. QESwap: the decoded mean `w`.
    #[serde(skip)]
    pub validation_trace: Vec<f64>,
}

impl ReconstructionReport {
    /// 1-based epoch at which `trace` first reaches `threshold`.
    pub fn epochs_to(trace: &[f64], threshold: f64) -> Option<usize> {
        trace.iter().position(|&f| f >= threshold).map(|i| i + 1)
    }

    pub fn epochs_to_threshold(&self, threshold: f64) -> Option<usize> {
        Self::epochs_to(&self.fidelity_trace, threshold)
    }

    /// Running maximum of the fidelity trace.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.fidelity_trace
            .iter()
            .scan(f64::NEG_INFINITY, |best, &f| {
                *best = best.max(f);
                Some(*best)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
