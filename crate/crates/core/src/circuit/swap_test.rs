use std::collections::BTreeMap;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::Rng;

use super::sim::final_state_deferred;
use super::{Gate, QuantumCircuit};

/// SWAP test over `2n + 1` qubits: ancilla 0, `prep_a` on qubits `1..=n`,
/// `prep_b` on qubits `n+1..=2n`, pairwise controlled swaps, ancilla measured.
pub fn build_swap_test(
    n_qubits: usize,
    prep_a: &QuantumCircuit,
    prep_b: &QuantumCircuit,
) -> Result<QuantumCircuit> {
    if n_qubits == 0 {
        return invalid("register width must be at least 1");
    }
    if prep_a.n_qubits() != n_qubits || prep_b.n_qubits() != n_qubits {
        return invalid(format!(
            "preparation widths {} and {} do not match {n_qubits}",
            prep_a.n_qubits(),
            prep_b.n_qubits()
        ));
    }
    if prep_a.has_measurement() || prep_b.has_measurement() {
        return invalid("preparation circuits must not measure");
    }
    let mut c = QuantumCircuit::new(2 * n_qubits + 1)?;
    c.push(Gate::H(0))?;
    c.append_shifted(prep_a, 1)?;
    c.append_shifted(prep_b, n_qubits + 1)?;
    for i in 1..=n_qubits {
        c.push(Gate::Cswap {
            control: 0,
            a: i,
            b: n_qubits + i,
        })?;
    }
    c.push(Gate::H(0))?;
    c.push(Gate::Measure(0))?;
    Ok(c)
}

fn single_measured(circuit: &QuantumCircuit) -> Result<usize> {
    let mut it = circuit.measured().iter();
    match (it.next(), it.next()) {
        (Some(&q), None) => Ok(q),
        (None, _) => invalid("circuit has no measured qubit"),
        _ => invalid("expected exactly one measured qubit"),
    }
}

/// Exact `⟨Z⟩` of the measured qubit, from the final statevector. For a SWAP
/// test this equals `|⟨a|b⟩|²`.
pub fn ancilla_expectation(circuit: &QuantumCircuit) -> Result<f64> {
    let q = single_measured(circuit)?;
    let amps = final_state_deferred::<f64>(circuit)?;
    let p0 = super::sim::prob_zero(&amps, q);
    Ok(2.0 * p0 - 1.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    /// Bitstring over the measured qubits, highest qubit leftmost.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl ShotResult {
    pub fn probability(&self, bits: &str) -> f64 {
        self.counts.get(bits).copied().unwrap_or(0) as f64 / self.shots as f64
    }
}

/// Samples the measured qubits `shots` times from the exact final distribution.
pub fn sample_shots(circuit: &QuantumCircuit, shots: u64, rng: &mut Rng) -> Result<ShotResult> {
    if shots == 0 {
        return invalid("shots must be at least 1");
    }
    let measured: Vec<usize> = circuit.measured().iter().copied().collect();
    if measured.is_empty() {
        return invalid("circuit has no measured qubit");
    }
    let amps = final_state_deferred::<f64>(circuit)?;
    let mut probs = vec![0.0f64; 1 << measured.len()];
    for (i, a) in amps.iter().enumerate() {
        let key = measured
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &q)| acc | (((i >> q) & 1) << k));
        probs[key] += a.norm_sqr();
    }
    // Multinomial draw as a chain of conditional binomials.
    let mut counts = BTreeMap::new();
    let mut remaining = shots;
    let mut mass = 1.0f64;
    for (key, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let k = if key + 1 == probs.len() || mass <= p {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("valid binomial parameters")
                .sample(rng.inner_mut())
        };
        mass -= p;
        remaining -= k;
        if k > 0 {
            let bits: String = (0..measured.len())
                .rev()
                .map(|b| if (key >> b) & 1 == 1 { '1' } else { '0' })
                .collect();
            counts.insert(bits, k);
        }
    }
    Ok(ShotResult { counts, shots })
}
