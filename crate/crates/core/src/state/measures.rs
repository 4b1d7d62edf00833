use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::density::{hermitian_eigen, psd_function};
use super::{DensityMatrix, StateVector};

/// `|⟨a|b⟩|²`.
pub fn overlap_fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    let f = a.inner(b)?.norm_sqr();
    Ok(clamp_unit(f))
}

fn clamp_unit<T: Real>(f: T) -> T {
    if f > T::one() {
        T::one()
    } else if f < T::zero() {
        T::zero()
    } else {
        f
    }
}

fn check_dims<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return invalid(format!(
            "dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        ));
    }
    Ok(())
}

/// `Tr(ρσ)`: what a SWAP test reports when its inputs are mixed.
pub fn hilbert_schmidt_overlap<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<T> {
    check_dims(rho, sigma)?;
    let (a, b) = (rho.entries(), sigma.entries());
    let n = a.nrows();
    // Tr(AB) = Σ_ij A_ij B_ji
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc.re)
}

/// Eigenvalues at or below round-off relative to the largest are treated
/// as exact zeros before taking square roots, which would amplify them.
fn roundoff_floor<T: Real>(values: &[T]) -> T {
    let max = values.iter().fold(T::zero(), |m, &v| if v > m { v } else { m });
    max * T::default_epsilon() * T::of(16.0 * values.len() as f64)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    check_dims(rho, sigma)?;
    let floor = roundoff_floor(&hermitian_eigen(rho.entries())?.values);
    let sqrt_rho = psd_function(rho.entries(), |v| if v > floor { v.sqrt() } else { T::zero() })?;
    let inner: DMatrix<Complex<T>> = &sqrt_rho * sigma.entries() * &sqrt_rho;
    let adj = inner.adjoint();
    let inner = (inner + adj).unscale(T::of(2.0));
    let eig = hermitian_eigen(&inner)?;
    let floor = roundoff_floor(&eig.values);
    let root_trace = eig
        .values
        .iter()
        .filter(|&&v| v > floor)
        .fold(T::zero(), |acc, &v| acc + v.sqrt());
    Ok(clamp_unit(root_trace * root_trace))
}

/// Reduced density matrix on `keep` (qubit `keep[k]` in sorted order becomes
/// bit `k` of the reduced index).
pub fn partial_trace<T: Real>(state: &StateVector<T>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    let n = state.n_qubits();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return invalid("keep set must be nonempty");
    }
    if keep.len() >= n {
        return invalid("keep set must be a strict subset of the qubits");
    }
    if let Some(&q) = keep.iter().find(|&&q| q >= n) {
        return invalid(format!("qubit {q} out of range for {n} qubits"));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let spread = |bits: usize, positions: &[usize]| {
        positions
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &q)| acc | (((bits >> k) & 1) << q))
    };
    let dim_a = 1usize << keep.len();
    let dim_b = 1usize << traced.len();
    let amps = state.amplitudes();
    let keep_index: Vec<usize> = (0..dim_a).map(|i| spread(i, &keep)).collect();
    let mut entries = DMatrix::from_element(dim_a, dim_a, Complex::new(T::zero(), T::zero()));
    for b in 0..dim_b {
        let base = spread(b, &traced);
        for i in 0..dim_a {
            let ai = amps[base | keep_index[i]];
            for j in 0..dim_a {
                entries[(i, j)] += ai * amps[base | keep_index[j]].conj();
            }
        }
    }
    Ok(DensityMatrix::from_raw_parts(keep.len(), entries))
}

/// Von Neumann entropy in bits, `0·log 0 := 0`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    let values = rho.eigenvalues();
    let two = T::of(2.0);
    let mut s = T::zero();
    for v in values {
        if v > T::zero() {
            s -= v * v.log(two);
        }
    }
    if s < T::zero() {
        T::zero()
    } else {
        s
    }
}

/// Bipartition used for entanglement analysis: the first `⌈n/2⌉` qubits.
pub fn half_chain_keep(n_qubits: usize) -> Vec<usize> {
    (0..n_qubits.div_ceil(2)).collect()
}

/// Half-chain entanglement entropy of a pure state; zero for one qubit.
pub fn half_chain_entropy<T: Real>(state: &StateVector<T>) -> Result<T> {
    let n = state.n_qubits();
    if n < 2 {
        return Ok(T::zero());
    }
    Ok(von_neumann_entropy(&partial_trace(state, &half_chain_keep(n))?))
}

