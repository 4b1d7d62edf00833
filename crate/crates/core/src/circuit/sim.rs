//! Exact statevector execution.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::{from_polar, Real};
use crate::state::StateVector;

use super::{Gate, QuantumCircuit};

pub(crate) type Mat2<T> = [[Complex<T>; 2]; 2];

fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

/// 2×2 matrix of a single-qubit unitary gate; `None` for multi-qubit and
/// non-unitary kinds.
pub(crate) fn single_qubit_matrix<T: Real>(gate: &Gate) -> Option<Mat2<T>> {
    let zero = cplx(0.0, 0.0);
    let one = cplx(1.0, 0.0);
    Some(match *gate {
        Gate::X(_) => [[zero, one], [one, zero]],
        Gate::Sx(_) => [
            [cplx(0.5, 0.5), cplx(0.5, -0.5)],
            [cplx(0.5, -0.5), cplx(0.5, 0.5)],
        ],
        Gate::Rz(_, theta) => {
            let half = T::of(theta / 2.0);
            [
                [from_polar(T::one(), -half), zero],
                [zero, from_polar(T::one(), half)],
            ]
        }
        Gate::H(_) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            [[cplx(h, 0.0), cplx(h, 0.0)], [cplx(h, 0.0), cplx(-h, 0.0)]]
        }
        Gate::Ry(_, theta) => {
            let (s, c) = T::of(theta / 2.0).sin_cos();
            [
                [Complex::new(c, T::zero()), Complex::new(-s, T::zero())],
                [Complex::new(s, T::zero()), Complex::new(c, T::zero())],
            ]
        }
        Gate::Id(_) | Gate::Delay(..) => [[one, zero], [zero, one]],
        _ => return None,
    })
}

pub(crate) fn apply_single<T: Real>(amps: &mut [Complex<T>], qubit: usize, m: &Mat2<T>) {
    let stride = 1usize << qubit;
    let n = amps.len();
    let mut base = 0;
    while base < n {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += stride << 1;
    }
}

pub(crate) fn apply_cx<T: Real>(amps: &mut [Complex<T>], control: usize, target: usize) {
    let (cm, tm) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

pub(crate) fn apply_cswap<T: Real>(amps: &mut [Complex<T>], control: usize, a: usize, b: usize) {
    let (cm, am, bm) = (1usize << control, 1usize << a, 1usize << b);
    for i in 0..amps.len() {
        // visit each swapped pair once: a-bit set, b-bit clear
        if i & cm != 0 && i & am != 0 && i & bm == 0 {
            amps.swap(i, (i & !am) | bm);
        }
    }
}

/// Probability that `qubit` reads 0.
pub(crate) fn prob_zero<T: Real>(amps: &[Complex<T>], qubit: usize) -> T {
    let mask = 1usize << qubit;
    amps.iter()
        .enumerate()
        .filter(|(i, _)| i & mask == 0)
        .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
}

/// Projects `qubit` onto `outcome`, renormalizes, then flips it to |0⟩ if
/// needed. Returns `false` if the outcome has zero weight.
pub(crate) fn project_and_reset<T: Real>(amps: &mut [Complex<T>], qubit: usize, outcome: bool) -> bool {
    let mask = 1usize << qubit;
    let zero = Complex::new(T::zero(), T::zero());
    let mut weight = T::zero();
    for (i, a) in amps.iter_mut().enumerate() {
        if (i & mask != 0) == outcome {
            weight += a.norm_sqr();
        } else {
            *a = zero;
        }
    }
    if !(weight > T::zero()) {
        return false;
    }
    let norm = weight.sqrt();
    for a in amps.iter_mut() {
        *a = a.unscale(norm);
    }
    if outcome {
        for i in 0..amps.len() {
            if i & mask == 0 {
                amps.swap(i, i | mask);
            }
        }
    }
    true
}

/// Applies one unitary gate in place. MEASURE and RESET are rejected.
pub(crate) fn apply_unitary<T: Real>(amps: &mut [Complex<T>], gate: &Gate) -> Result<()> {
    match *gate {
        Gate::Cx { control, target } => apply_cx(amps, control, target),
        Gate::Cswap { control, a, b } => apply_cswap(amps, control, a, b),
        Gate::Id(_) | Gate::Delay(..) => {}
        Gate::Measure(_) | Gate::Reset(_) => {
            return invalid(format!("{} is not a unitary gate", gate.kind().name()))
        }
        ref g => {
            let m = single_qubit_matrix::<T>(g).expect("single-qubit unitary");
            apply_single(amps, g.qubits()[0], &m);
        }
    }
    Ok(())
}

/// Runs `circuit` on `initial` and returns the final state.
///
/// MEASURE is rejected (use [`super::sample_shots`] or
/// [`super::ancilla_expectation`]). RESET projects the qubit onto its more
/// likely outcome and maps it to |0⟩; on a qubit already in |0⟩ or |1⟩ this
/// coincides with the physical reset.
pub fn execute_statevector<T: Real>(
    circuit: &QuantumCircuit,
    initial: &StateVector<T>,
) -> Result<StateVector<T>> {
    if initial.n_qubits() != circuit.n_qubits() {
        return invalid(format!(
            "initial state has {} qubits, circuit has {}",
            initial.n_qubits(),
            circuit.n_qubits()
        ));
    }
    if circuit.has_measurement() {
        return invalid("circuit contains MEASURE; use sample_shots or ancilla_expectation");
    }
    let mut amps = initial.amplitudes().to_vec();
    run_unmeasured(&mut amps, circuit)?;
    Ok(StateVector::from_raw_parts(circuit.n_qubits(), amps))
}

/// Executes every gate except MEASURE (deferred to the caller).
pub(crate) fn run_unmeasured<T: Real>(amps: &mut [Complex<T>], circuit: &QuantumCircuit) -> Result<()> {
    for gate in circuit.gates() {
        match *gate {
            Gate::Measure(_) => {}
            Gate::Reset(q) => {
                let p0 = prob_zero(amps, q);
                let outcome = p0 + p0 < T::one();
                if !project_and_reset(amps, q, outcome) {
                    project_and_reset(amps, q, !outcome);
                }
            }
            ref g => apply_unitary(amps, g)?,
        }
    }
    Ok(())
}

/// Final state of `circuit` run from `|0…0⟩`, with measurements deferred.
pub(crate) fn final_state_deferred<T: Real>(circuit: &QuantumCircuit) -> Result<Vec<Complex<T>>> {
    for (i, g) in circuit.gates().iter().enumerate() {
        if let Gate::Measure(q) = *g {
            if circuit.gates()[i + 1..].iter().any(|h| h.qubits().contains(&q)) {
                return invalid(format!(
                    "qubit {q} is reused after measurement; deferred measurement does not apply"
                ));
            }
        }
    }
    let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << circuit.n_qubits()];
    amps[0] = Complex::new(T::one(), T::zero());
    run_unmeasured(&mut amps, circuit)?;
    Ok(amps)
}
