use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::StateVector;

/// `2^n × 2^n` unitary, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix<T: Real = f64> {
    n_qubits: usize,
    entries: DMatrix<Complex<T>>,
}

/// Largest elementwise deviation of `U†U` from the identity.
pub fn unitarity_defect<T: Real>(m: &DMatrix<Complex<T>>) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            let z = prod[(i, j)];
            let d = ((z.re.as_f64() - target).powi(2) + z.im.as_f64().powi(2)).sqrt();
            worst = worst.max(d);
        }
    }
    worst
}

impl<T: Real> UnitaryMatrix<T> {
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return invalid("unitary must be square");
        }
        let Some(n_qubits) = super::vector::qubits_for_len(n) else {
            return invalid(format!("dimension {n} is not 2^n for n >= 1"));
        };
        let defect = unitarity_defect(&entries);
        if defect > T::NORM_TOLERANCE {
            return invalid(format!("matrix is not unitary (max |U†U - I| = {defect:e})"));
        }
        Ok(Self { n_qubits, entries })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("n_qubits must be at least 1");
        }
        let n = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            entries: DMatrix::identity(n, n),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn apply(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        if state.n_qubits() != self.n_qubits {
            return invalid("dimension mismatch between unitary and state");
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let out = &self.entries * v;
        Ok(StateVector::from_raw_parts(
            self.n_qubits,
            out.iter().copied().collect(),
        ))
    }

    /// `U|0…0⟩`, i.e. the first column.
    pub fn prepared_state(&self) -> StateVector<T> {
        StateVector::from_raw_parts(
            self.n_qubits,
            self.entries.column(0).iter().copied().collect(),
        )
    }
}
