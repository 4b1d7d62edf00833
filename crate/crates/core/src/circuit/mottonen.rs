//! Amplitude loading from `|0…0⟩` with uniformly controlled rotations.
//!
//! Magnitudes are set by a cascade of uniformly controlled RY rotations from
//! the most significant qubit down; relative phases by a cascade of uniformly
//! controlled RZ rotations. Each uniformly controlled rotation is expanded
//! into plain rotations and a Gray-code CX ladder. The prepared state matches
//! the target up to one global phase.

use crate::error::{invalid, Result};
use crate::scalar::{arg, Real};
use crate::state::StateVector;

use super::{Gate, QuantumCircuit};

const ZERO_ANGLE: f64 = 1e-14;

#[derive(Clone, Copy)]
enum Axis {
    Y,
    Z,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Applies `R_axis(angles[j])` to `target` when the control register (bit `b`
/// of `j` ↔ `controls[b]`) holds `j`.
fn uniformly_controlled(
    circuit: &mut QuantumCircuit,
    axis: Axis,
    angles: &[f64],
    controls: &[usize],
    target: usize,
) -> Result<()> {
    debug_assert_eq!(angles.len(), 1 << controls.len());
    if angles.iter().all(|a| a.abs() < ZERO_ANGLE) {
        return Ok(());
    }
    let rot = |theta: f64| match axis {
        Axis::Y => Gate::Ry(target, theta),
        Axis::Z => Gate::Rz(target, theta),
    };
    let k = controls.len();
    if k == 0 {
        circuit.push(rot(angles[0]))?;
        return Ok(());
    }
    let m = angles.len();
    let scale = 1.0 / m as f64;
    for i in 0..m {
        let g = gray(i);
        let theta: f64 = angles
            .iter()
            .enumerate()
            .map(|(j, &a)| if (j & g).count_ones() % 2 == 0 { a } else { -a })
            .sum::<f64>()
            * scale;
        circuit.push(rot(theta))?;
        let flip_bit = if i + 1 < m {
            (i + 1).trailing_zeros() as usize
        } else {
            k - 1
        };
        circuit.push(Gate::Cx {
            control: controls[flip_bit],
            target,
        })?;
    }
    Ok(())
}

/// Circuit that maps `|0…0⟩` to `target` (up to global phase), using only
/// RY, RZ and CX.
pub fn mottonen_prepare<T: Real>(target: &StateVector<T>) -> Result<QuantumCircuit> {
    let n = target.n_qubits();
    let weights: Vec<f64> = target.amplitudes().iter().map(|a| a.norm_sqr().as_f64()).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return invalid("cannot prepare a zero-norm state");
    }
    let mut circuit = QuantumCircuit::new(n)?;

    for t in (0..n).rev() {
        let k = n - 1 - t;
        let angles: Vec<f64> = (0..1usize << k)
            .map(|j| {
                let (mut s0, mut s1) = (0.0, 0.0);
                for low in 0..1usize << t {
                    let x = (j << (t + 1)) | low;
                    s0 += weights[x];
                    s1 += weights[x | (1 << t)];
                }
                2.0 * s1.sqrt().atan2(s0.sqrt())
            })
            .collect();
        let controls: Vec<usize> = (t + 1..n).collect();
        uniformly_controlled(&mut circuit, Axis::Y, &angles, &controls, t)?;
    }

    let mut phases: Vec<f64> = target
        .amplitudes()
        .iter()
        .map(|&a| arg(a).as_f64())
        .collect();
    for t in 0..n {
        let (theta, next): (Vec<f64>, Vec<f64>) = phases
            .chunks_exact(2)
            .map(|p| (p[1] - p[0], 0.5 * (p[0] + p[1])))
            .unzip();
        let controls: Vec<usize> = (t + 1..n).collect();
        uniformly_controlled(&mut circuit, Axis::Z, &theta, &controls, t)?;
        phases = next;
    }
    Ok(circuit)
}
