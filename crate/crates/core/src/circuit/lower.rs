use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::Result;

use super::{Gate, QuantumCircuit};

fn lower_h(q: usize, out: &mut Vec<Gate>) {
    out.extend([Gate::Rz(q, FRAC_PI_2), Gate::Sx(q), Gate::Rz(q, FRAC_PI_2)]);
}

fn lower_ry(q: usize, theta: f64, out: &mut Vec<Gate>) {
    out.extend([Gate::Sx(q), Gate::Rz(q, theta + PI), Gate::Sx(q), Gate::Rz(q, PI)]);
}

/// Toffoli with controls `c1`, `c2` and target `t`: 6 CX plus T/T† and H.
fn lower_toffoli(c1: usize, c2: usize, t: usize, out: &mut Vec<Gate>) {
    let cx = |control, target| Gate::Cx { control, target };
    let tg = |q| Gate::Rz(q, FRAC_PI_4);
    let tdg = |q| Gate::Rz(q, -FRAC_PI_4);
    lower_h(t, out);
    out.extend([cx(c2, t), tdg(t), cx(c1, t), tg(t), cx(c2, t), tdg(t), cx(c1, t), tg(c2), tg(t)]);
    lower_h(t, out);
    out.extend([cx(c1, c2), tg(c1), tdg(c2), cx(c1, c2)]);
}

/// Rewrites the circuit over `{cx, delay, id, measure, reset, rz, sx, x}`.
/// Equivalent to the input up to global phase.
pub fn lower_to_basis(circuit: &QuantumCircuit) -> Result<QuantumCircuit> {
    let mut gates = Vec::with_capacity(circuit.len() * 2);
    for &gate in circuit.gates() {
        match gate {
            Gate::H(q) => lower_h(q, &mut gates),
            Gate::Ry(q, theta) => lower_ry(q, theta, &mut gates),
            Gate::Cswap { control, a, b } => {
                gates.push(Gate::Cx { control: b, target: a });
                lower_toffoli(control, a, b, &mut gates);
                gates.push(Gate::Cx { control: b, target: a });
            }
            g => gates.push(g),
        }
    }
    let mut out = QuantumCircuit::new(circuit.n_qubits())?;
    out.extend(gates)?;
    Ok(out)
}
