use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::StateVector;

/// Hermitian, unit-trace, positive semidefinite matrix over `n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    n_qubits: usize,
    entries: DMatrix<Complex<T>>,
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues clamped at 0
/// when they are within the PSD tolerance below it.
pub(crate) struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: DMatrix<Complex<T>>,
}

pub(crate) fn hermitian_eigen<T: Real>(m: &DMatrix<Complex<T>>) -> Result<HermitianEigen<T>> {
    let eig = m.clone().symmetric_eigen();
    let tol = T::of(T::PSD_TOLERANCE);
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &v in eig.eigenvalues.iter() {
        if v < -tol {
            return invalid(format!(
                "matrix is not positive semidefinite (eigenvalue {:e})",
                v.as_f64()
            ));
        }
        values.push(if v < T::zero() { T::zero() } else { v });
    }
    Ok(HermitianEigen {
        values,
        vectors: eig.eigenvectors,
    })
}

/// `f(H)` for a PSD Hermitian matrix, through its eigen-decomposition.
pub(crate) fn psd_function<T: Real>(
    m: &DMatrix<Complex<T>>,
    f: impl Fn(T) -> T,
) -> Result<DMatrix<Complex<T>>> {
    let HermitianEigen { values, vectors } = hermitian_eigen(m)?;
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fv = Complex::new(f(v), T::zero());
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    Ok(scaled * vectors.adjoint())
}

fn check_hermitian<T: Real>(m: &DMatrix<Complex<T>>, tol: f64) -> Result<()> {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let d = m[(i, j)] - m[(j, i)].conj();
            if d.norm_sqr().as_f64().sqrt() > tol {
                return invalid(format!("matrix is not Hermitian at ({i},{j})"));
            }
        }
    }
    Ok(())
}

pub(crate) fn trace<T: Real>(m: &DMatrix<Complex<T>>) -> Complex<T> {
    (0..m.nrows()).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + m[(i, i)])
}

impl<T: Real> DensityMatrix<T> {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return invalid("density matrix must be square");
        }
        let Some(n_qubits) = super::vector::qubits_for_len(n) else {
            return invalid(format!("dimension {n} is not 2^n for n >= 1"));
        };
        check_hermitian(&entries, T::NORM_TOLERANCE)?;
        let tr = trace(&entries);
        if (tr.re.as_f64() - 1.0).abs() > T::NORM_TOLERANCE || tr.im.as_f64().abs() > T::NORM_TOLERANCE {
            return invalid(format!("trace is {}+{}i, expected 1", tr.re.as_f64(), tr.im.as_f64()));
        }
        hermitian_eigen(&entries)?;
        Ok(Self { n_qubits, entries })
    }

    /// `ρ = M M† / Tr(M M†)`.
    pub fn from_gram(m: &DMatrix<Complex<T>>) -> Result<Self> {
        let gram = m * m.adjoint();
        let tr = trace(&gram).re;
        if !(tr > T::zero()) || !tr.is_finite() {
            return invalid("cannot build a density matrix from a zero matrix");
        }
        let mut entries = gram.unscale(tr);
        // Symmetrize away rounding so the Hermitian check is exact.
        let adj = entries.adjoint();
        entries = (entries + adj).unscale(T::of(2.0));
        Self::new(entries)
    }

    pub fn pure(state: &StateVector<T>) -> Self {
        let a = state.amplitudes();
        let n = a.len();
        let entries = DMatrix::from_fn(n, n, |i, j| a[i] * a[j].conj());
        Self {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("n_qubits must be at least 1");
        }
        let n = 1usize << n_qubits;
        let v = Complex::new(T::one() / T::of(n as f64), T::zero());
        Ok(Self {
            n_qubits,
            entries: DMatrix::from_diagonal_element(n, n, v),
        })
    }

    /// Convex mixture `Σ p_k |ψ_k⟩⟨ψ_k|`; weights must be non-negative and sum to 1.
    pub fn mixture(components: &[(T, StateVector<T>)]) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return invalid("mixture needs at least one component");
        };
        let n = first.dim();
        let mut entries = DMatrix::zeros(n, n);
        for (p, s) in components {
            if s.dim() != n {
                return invalid("mixture components have different dimensions");
            }
            if *p < T::zero() {
                return invalid("mixture weights must be non-negative");
            }
            entries += DensityMatrix::pure(s).entries.scale(*p);
        }
        Self::new(entries)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn trace(&self) -> Complex<T> {
        trace(&self.entries)
    }

    /// Eigenvalues in ascending order, clamped at zero.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut v = hermitian_eigen(&self.entries)
            .expect("validated at construction")
            .values;
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    /// Eigenpairs `(λ_k, |v_k⟩)` with `λ_k > cutoff`, largest first.
    pub fn spectral_components(&self, cutoff: T) -> Vec<(T, StateVector<T>)> {
        let eig = hermitian_eigen(&self.entries).expect("validated at construction");
        let mut out: Vec<(T, StateVector<T>)> = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > cutoff)
            .filter_map(|(k, &v)| {
                let col: Vec<Complex<T>> = eig.vectors.column(k).iter().copied().collect();
                StateVector::from_amplitudes(col).ok().map(|s| (v, s))
            })
            .collect();
        out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub(crate) fn from_raw_parts(n_qubits: usize, entries: DMatrix<Complex<T>>) -> Self {
        Self { n_qubits, entries }
    }
}
