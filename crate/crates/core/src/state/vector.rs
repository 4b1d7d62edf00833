use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::rng::Rng;
use crate::scalar::Real;

use super::DensityMatrix;

/// Pure state of `n_qubits` qubits. Qubit 0 is the least-significant bit of
/// the basis index. Always unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real = f64> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

pub(crate) fn qubits_for_len(len: usize) -> Option<usize> {
    if len >= 2 && len.is_power_of_two() {
        Some(len.trailing_zeros() as usize)
    } else {
        None
    }
}

pub(crate) fn norm_sqr<T: Real>(amps: &[Complex<T>]) -> T {
    amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
}

impl<T: Real> StateVector<T> {
    /// Normalizes `amplitudes` and wraps them. The length must be `2^n`, `n ≥ 1`.
    pub fn from_amplitudes(mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let Some(n_qubits) = qubits_for_len(amplitudes.len()) else {
            return invalid(format!(
                "amplitude count {} is not 2^n for n >= 1",
                amplitudes.len()
            ));
        };
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        for a in &mut amplitudes {
            *a = a.unscale(norm);
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps amplitudes that must already be unit-norm within `tolerance`.
    pub fn from_normalized(amplitudes: Vec<Complex<T>>, tolerance: f64) -> Result<Self> {
        let Some(n_qubits) = qubits_for_len(amplitudes.len()) else {
            return invalid(format!(
                "amplitude count {} is not 2^n for n >= 1",
                amplitudes.len()
            ));
        };
        let norm = norm_sqr(&amplitudes).as_f64();
        if !((norm - 1.0).abs() <= tolerance) {
            return invalid(format!("state norm^2 is {norm}, expected 1"));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return invalid("n_qubits must be at least 1");
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return invalid(format!("basis index {index} out of range for {n_qubits} qubits"));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Builds from interleaved `[re0, im0, re1, im1, ...]` and normalizes.
    pub fn from_interleaved(raw: &[f64]) -> Result<Self> {
        if raw.len() % 2 != 0 {
            return invalid("interleaved vector must have even length");
        }
        let amps = raw
            .chunks_exact(2)
            .map(|p| Complex::new(T::of(p[0]), T::of(p[1])))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .flat_map(|a| [a.re.as_f64(), a.im.as_f64()])
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.n_qubits != other.n_qubits {
            return invalid(format!(
                "dimension mismatch: {} vs {} qubits",
                self.n_qubits, other.n_qubits
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            }))
    }

    /// Multiplies by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: T) -> Self {
        let phase = crate::scalar::from_polar(T::one(), theta);
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::pure(self)
    }

    /// Probability of measuring `qubit` in `|0⟩`.
    pub fn prob_zero(&self, qubit: usize) -> T {
        let mask = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    /// `⟨Z⟩` on `qubit`.
    pub fn expectation_z(&self, qubit: usize) -> T {
        let p0 = self.prob_zero(qubit);
        p0 + p0 - self.norm_sqr()
    }

    /// Converts the scalar type (e.g. `f64 → f32`).
    pub fn cast<U: Real>(&self) -> StateVector<U> {
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self
                .amplitudes
                .iter()
                .map(|a| Complex::new(U::of(a.re.as_f64()), U::of(a.im.as_f64())))
                .collect(),
        }
    }

    pub(crate) fn from_raw_parts(n_qubits: usize, amplitudes: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }
}

/// Haar-random pure state: Gaussian real and imaginary parts, normalized.
pub fn random_pure_state<T: Real>(n_qubits: usize, rng: &mut Rng) -> Result<StateVector<T>> {
    if n_qubits == 0 {
        return invalid("n_qubits must be at least 1");
    }
    if n_qubits > 24 {
        return invalid(format!("{n_qubits} qubits is beyond the dense-state range"));
    }
    let dim = 1usize << n_qubits;
    loop {
        let amps: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re = rng.normal();
                let im = rng.normal();
                Complex::new(T::of(re), T::of(im))
            })
            .collect();
        // A zero draw has probability zero; loop anyway rather than fail.
        if let Ok(state) = StateVector::from_amplitudes(amps) {
            return Ok(state);
        }
    }
}
