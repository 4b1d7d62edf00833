use rayon::prelude::*;

use crate::circuit::sim::{apply_unitary, prob_zero, project_and_reset};
use crate::circuit::{Gate, QuantumCircuit};
use crate::error::{invalid, Result};
use crate::rng::Rng;
use crate::scalar::pairwise_sum;
use crate::Complex64 as C;

use super::channel::KrausChannel;
use super::model::{Assignment, NoiseModel, Placement};

/// Mean and standard error of the per-trajectory `⟨Z⟩` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trajectories: u64,
}

fn apply_assignments(amps: &mut [C], assignments: &[Assignment], qubits: &[usize], rng: &mut Rng, scratch: &mut Vec<C>) {
    for a in assignments {
        match a.placement {
            Placement::Joint => a.channel.apply_stochastic(amps, qubits, rng, scratch),
            Placement::EachOperand => {
                for &q in qubits {
                    a.channel.apply_stochastic(amps, &[q], rng, scratch);
                }
            }
        }
    }
}

fn run_trajectory(
    circuit: &QuantumCircuit,
    model: &NoiseModel,
    delays: &[Option<KrausChannel>],
    measured: usize,
    mut rng: Rng,
) -> Result<f64> {
    let mut amps = vec![C::new(0.0, 0.0); 1 << circuit.n_qubits()];
    amps[0] = C::new(1.0, 0.0);
    let mut scratch = Vec::with_capacity(amps.len());
    for (i, gate) in circuit.gates().iter().enumerate() {
        match *gate {
            Gate::Measure(q) => {
                // Readout is deferred to the end; only its relaxation acts here.
                if let Some(ch) = model.measurement() {
                    ch.apply_stochastic(&mut amps, &[q], &mut rng, &mut scratch);
                }
            }
            Gate::Reset(q) => {
                let p0 = prob_zero(&amps, q);
                let outcome = rng.uniform() >= p0;
                if !project_and_reset(&mut amps, q, outcome) {
                    project_and_reset(&mut amps, q, !outcome);
                }
            }
            Gate::Delay(q, _) => {
                if let Some(ch) = &delays[i] {
                    ch.apply_stochastic(&mut amps, &[q], &mut rng, &mut scratch);
                }
            }
            Gate::Cx { control, target } => {
                apply_unitary(&mut amps, gate)?;
                let assignments = model.cx_assignments(control, target);
                apply_assignments(&mut amps, assignments, &[control, target], &mut rng, &mut scratch);
            }
            ref g => {
                apply_unitary(&mut amps, g)?;
                apply_assignments(&mut amps, model.assignments(g.kind()), &g.qubits(), &mut rng, &mut scratch);
            }
        }
    }
    let p0 = prob_zero(&amps, measured);
    Ok(2.0 * p0 - 1.0)
}

/// Monte Carlo trajectory estimate of the measured qubit's `⟨Z⟩`.
///
/// Each trajectory draws its own stream from `rng.split`-style derivation,
/// so the estimate depends only on the seed, not on thread scheduling.
pub fn estimate_trajectories(
    circuit: &QuantumCircuit,
    model: &NoiseModel,
    trajectories: u64,
    rng: &mut Rng,
) -> Result<TrajectoryEstimate> {
    if trajectories == 0 {
        return invalid("trajectories must be at least 1");
    }
    if let Some(g) = circuit.gates().iter().find(|g| !g.kind().is_basis()) {
        return invalid(format!(
            "{} is not a basis gate; lower the circuit first",
            g.kind().name()
        ));
    }
    let measured: Vec<usize> = circuit.measured().iter().copied().collect();
    let [measured] = measured[..] else {
        return invalid("circuit must measure exactly one qubit");
    };
    for (i, g) in circuit.gates().iter().enumerate() {
        if let Gate::Measure(q) = *g {
            if circuit.gates()[i + 1..].iter().any(|h| h.qubits().contains(&q)) {
                return invalid(format!("qubit {q} is reused after measurement"));
            }
        }
    }
    let delays = circuit
        .gates()
        .iter()
        .map(|g| match *g {
            Gate::Delay(_, d) => model.delay_channel(d),
            _ => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;

    let root = rng.fork();
    let values = (0..trajectories)
        .into_par_iter()
        .map(|t| run_trajectory(circuit, model, &delays, measured, root.split(t)))
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = pairwise_sum(&values) / n;
    let squares: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = if values.len() > 1 {
        pairwise_sum(&squares) / (n - 1.0)
    } else {
        0.0
    };
    Ok(TrajectoryEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trajectories,
    })
}

/// Mean ancilla `⟨Z⟩` over `trajectories` noisy runs of a lowered circuit.
pub fn execute_trajectories(
    circuit: &QuantumCircuit,
    model: &NoiseModel,
    trajectories: u64,
    rng: &mut Rng,
) -> Result<f64> {
    estimate_trajectories(circuit, model, trajectories, rng).map(|e| e.mean)
}

