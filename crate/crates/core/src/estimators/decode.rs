use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::state::{DensityMatrix, StateVector, UnitaryMatrix};
use crate::Complex64 as C;

use super::oracle::Candidate;
use super::Representation;

/// Relative size of the smallest `|R_kk|` below which `M` counts as singular.
const RANK_TOLERANCE: f64 = 1e-12;

/// Pairs `raw[2k] + i·raw[2k+1]` and normalizes.
pub fn decode_candidate_state(raw: &[f64]) -> Result<StateVector> {
    StateVector::from_interleaved(raw)
}

fn square_from_raw(raw: &[f64]) -> Result<DMatrix<C>> {
    let entries = raw.len() / 2;
    let d = (entries as f64).sqrt().round() as usize;
    if raw.len() % 2 != 0 || d * d != entries || !d.is_power_of_two() || d < 2 {
        return invalid(format!("raw length {} is not 2·d² for d = 2^n", raw.len()));
    }
    Ok(DMatrix::from_row_iterator(
        d,
        d,
        raw.chunks_exact(2).map(|p| C::new(p[0], p[1])),
    ))
}

/// QR of the row-major matrix encoded by `raw`, with `R`'s diagonal made
/// real-positive. Fails with [`Error::RankDeficient`] when `M` is singular.
pub fn decode_candidate_unitary(raw: &[f64]) -> Result<UnitaryMatrix> {
    let m = square_from_raw(raw)?;
    let d = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::RankDeficient(0.0));
    }
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        let diag = r[(k, k)];
        let mag = diag.norm();
        if mag <= RANK_TOLERANCE * scale {
            return Err(Error::RankDeficient(mag / scale));
        }
        let phase = diag / mag;
        for z in q.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    UnitaryMatrix::new(q)
}

/// `ρ = MM†/Tr(MM†)` for the row-major matrix encoded by `raw`.
pub fn decode_candidate_density(raw: &[f64]) -> Result<DensityMatrix> {
    DensityMatrix::from_gram(&square_from_raw(raw)?)
}

/// Decodes `raw` for `repr` and returns the reconstruction together with the
/// candidate the oracle sees. A singular unitary encoding is nudged along
/// the diagonal and decoded again.
pub fn decode_for_oracle(repr: Representation, raw: &[f64]) -> Result<(Reconstruction, Candidate)> {
    match repr {
        Representation::StateVector => {
            let s = decode_candidate_state(raw)?;
            Ok((Reconstruction::State(s.clone()), Candidate::State(s)))
        }
        Representation::Unitary => {
            let mut raw = raw.to_vec();
            let d = ((raw.len() / 2) as f64).sqrt().round() as usize;
            let mut nudge = 1e-8;
            loop {
                match decode_candidate_unitary(&raw) {
                    Ok(u) => {
                        let s = u.prepared_state();
                        return Ok((Reconstruction::Unitary(u), Candidate::State(s)));
                    }
                    Err(Error::RankDeficient(_)) if nudge < 1.0 => {
                        for k in 0..d {
                            raw[2 * (k * d + k)] += nudge;
                        }
                        nudge *= 10.0;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Representation::Density => {
            let rho = decode_candidate_density(raw)?;
            Ok((Reconstruction::Density(rho.clone()), Candidate::Density(rho)))
        }
    }
}

/// A decoded reconstruction in its native representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Reconstruction {
    State(StateVector),
    Unitary(UnitaryMatrix),
    Density(DensityMatrix),
}

impl Reconstruction {
    /// The pure state this reconstruction prepares, if it is pure.
    pub fn state(&self) -> Option<StateVector> {
        match self {
            Reconstruction::State(s) => Some(s.clone()),
            Reconstruction::Unitary(u) => Some(u.prepared_state()),
            Reconstruction::Density(_) => None,
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            Reconstruction::State(s) => s.density(),
            Reconstruction::Unitary(u) => u.prepared_state().density(),
            Reconstruction::Density(d) => d.clone(),
        }
    }
}
