//! Snapshots taken part-way through a circuit.

use qsnap_core::circuit::{execute_statevector, QuantumCircuit};
use qsnap_core::state::StateVector;
use qsnap_core::store::{SnapshotMetadata, SnapshotRecord};

use crate::error::Result;
use crate::runs::{reconstruct_known, KnownTargetRun, RunSettings};

#[derive(Debug, Clone)]
pub struct MidcircuitSnapshot {
    pub cut: usize,
    pub gate_count: usize,
    /// `cut <k>/<len>`, carried into stored metadata.
    pub label: String,
    /// Exact state after the first `cut` gates.
    pub target: StateVector,
    pub run: KnownTargetRun,
}

impl MidcircuitSnapshot {
    /// Store record for the reconstructed state, if it is pure.
    pub fn record(&self) -> Option<SnapshotRecord> {
        let report = &self.run.report;
        let state = report.candidate.as_ref()?.state()?;
        let meta = SnapshotMetadata::now(
            &report.method.to_string(),
            &report.representation.to_string(),
            self.run.final_fidelity,
            report.epochs,
            report.seed,
            &self.label,
        );
        Some(SnapshotRecord::from_state(&state, meta))
    }
}

/// Reconstructs the state after the first `cut` gates of `circuit`. The
/// oracle re-prepares that prefix for every evaluation.
pub fn run_midcircuit_snapshot(
    circuit: &QuantumCircuit,
    cut: usize,
    settings: &RunSettings,
    oracle_seed: u64,
) -> Result<MidcircuitSnapshot> {
    let prefix = circuit.prefix(cut)?;
    let target = execute_statevector(&prefix, &StateVector::zero(circuit.n_qubits())?)?;
    let run = reconstruct_known(&prefix, settings, oracle_seed)?;
    Ok(MidcircuitSnapshot { cut, gate_count: circuit.len(), label: format!("cut {cut}/{}", circuit.len()), target, run })
}
