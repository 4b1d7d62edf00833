use std::sync::atomic::{AtomicU64, Ordering};

use crate::circuit::{
    ancilla_expectation, build_swap_test, lower_to_basis, mottonen_prepare, sample_shots,
    QuantumCircuit,
};
use crate::error::{invalid, Result};
use crate::noise::{estimate_trajectories, NoiseModel};
use crate::rng::Rng;
use crate::state::{DensityMatrix, StateVector};

/// Spectral weights below this are dropped when a mixed candidate is split
/// into pure preparations.
const COMPONENT_CUTOFF: f64 = 1e-12;

/// What an estimator hands to the oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    State(StateVector),
    Density(DensityMatrix),
}

impl Candidate {
    pub fn n_qubits(&self) -> usize {
        match self {
            Candidate::State(s) => s.n_qubits(),
            Candidate::Density(d) => d.n_qubits(),
        }
    }

    /// Weighted pure states whose mixture is this candidate.
    pub fn components(&self) -> Vec<(f64, StateVector)> {
        match self {
            Candidate::State(s) => vec![(1.0, s.clone())],
            Candidate::Density(d) => {
                let comps = d.spectral_components(COMPONENT_CUTOFF);
                let total: f64 = comps.iter().map(|c| c.0).sum();
                comps.into_iter().map(|(w, s)| (w / total, s)).collect()
            }
        }
    }
}

/// The only channel between an estimator and the unknown target.
pub trait FidelityOracle: Sync {
    fn evaluate(&self, candidate: &Candidate) -> Result<f64>;
}

impl<O: FidelityOracle + ?Sized> FidelityOracle for &O {
    fn evaluate(&self, candidate: &Candidate) -> Result<f64> {
        (**self).evaluate(candidate)
    }
}

#[derive(Debug, Clone)]
pub enum OracleMode {
    /// Exact ancilla `⟨Z⟩` from the final statevector.
    Analytic,
    /// `2·P̂(0) − 1` from this many shots.
    Shots(u64),
    /// Trajectory average over the lowered circuit under `model`.
    Noisy { model: NoiseModel, trajectories: u64 },
}

/// SWAP-test oracle against a target given only as preparation circuits.
///
/// A mixed target is an ensemble of weighted preparations; a mixed candidate
/// is split into its spectral components. The returned value is then the
/// weighted sum of pairwise SWAP-test expectations, i.e. `Tr(ρσ)`.
#[derive(Debug)]
pub struct SwapTestOracle {
    n_qubits: usize,
    target: Vec<(f64, QuantumCircuit)>,
    mode: OracleMode,
    rng: Rng,
    evaluations: AtomicU64,
}

impl SwapTestOracle {
    pub fn new(target: QuantumCircuit, mode: OracleMode, seed: u64) -> Result<Self> {
        Self::ensemble(vec![(1.0, target)], mode, seed)
    }

    pub fn ensemble(target: Vec<(f64, QuantumCircuit)>, mode: OracleMode, seed: u64) -> Result<Self> {
        let Some(n_qubits) = target.first().map(|t| t.1.n_qubits()) else {
            return invalid("target ensemble is empty");
        };
        if target.iter().any(|(w, c)| c.n_qubits() != n_qubits || !(*w >= 0.0)) {
            return invalid("ensemble members must share a width and have non-negative weights");
        }
        if target.iter().any(|(_, c)| c.has_measurement()) {
            return invalid("target preparation must not measure");
        }
        let total: f64 = target.iter().map(|t| t.0).sum();
        if !(total > 0.0) {
            return invalid("ensemble weights sum to zero");
        }
        match &mode {
            OracleMode::Shots(0) => return invalid("shot count must be at least 1"),
            OracleMode::Noisy { trajectories: 0, .. } => return invalid("trajectories must be at least 1"),
            _ => {}
        }
        Ok(Self {
            n_qubits,
            target: target.into_iter().map(|(w, c)| (w / total, c)).collect(),
            mode,
            rng: Rng::new(seed),
            evaluations: AtomicU64::new(0),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mode(&self) -> &OracleMode {
        &self.mode
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::SeqCst)
    }

    fn pair_expectation(&self, circuit: &QuantumCircuit, rng: &mut Rng) -> Result<f64> {
        match &self.mode {
            OracleMode::Analytic => ancilla_expectation(circuit),
            OracleMode::Shots(shots) => {
                let r = sample_shots(circuit, *shots, rng)?;
                Ok(2.0 * r.probability("0") - 1.0)
            }
            OracleMode::Noisy { model, trajectories } => {
                let lowered = lower_to_basis(circuit)?;
                Ok(estimate_trajectories(&lowered, model, *trajectories, rng)?.mean)
            }
        }
    }
}

impl FidelityOracle for SwapTestOracle {
    fn evaluate(&self, candidate: &Candidate) -> Result<f64> {
        let index = self.evaluations.fetch_add(1, Ordering::SeqCst);
        if candidate.n_qubits() != self.n_qubits {
            return invalid(format!(
                "candidate has {} qubits, target has {}",
                candidate.n_qubits(),
                self.n_qubits
            ));
        }
        let mut rng = self.rng.split(index);
        let mut total = 0.0;
        for (p, state) in candidate.components() {
            let prep = mottonen_prepare(&state)?;
            for (q, target) in &self.target {
                let circuit = build_swap_test(self.n_qubits, target, &prep)?;
                total += p * q * self.pair_expectation(&circuit, &mut rng)?;
            }
        }
        Ok(total)
    }
}
