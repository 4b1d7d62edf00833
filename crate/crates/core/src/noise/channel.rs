use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::rng::Rng;
use crate::Complex64 as C;

const COMPLETENESS_TOLERANCE: f64 = 1e-9;
const DROP_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
enum Selection {
    /// Every operator is proportional to a unitary: the branch
    /// probabilities do not depend on the state.
    Fixed { cumulative: Vec<f64>, identity: Vec<bool> },
    /// General channel: branch `i` is taken with probability `‖K_i ψ‖²`.
    StateDependent,
}

/// Completely positive, trace-preserving map on one or two qubits.
///
/// For two-qubit operators the local basis index is `b(q0) + 2·b(q1)`,
/// where `q0`, `q1` are the operands in the order they are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<DMatrix<C>>,
    arity: usize,
    selection: Selection,
}

fn pauli(index: usize) -> DMatrix<C> {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match index {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!("pauli index"),
    }
}

/// `A` acting on the low local qubit, `B` on the high one.
fn local_kron(low: &DMatrix<C>, high: &DMatrix<C>) -> DMatrix<C> {
    DMatrix::from_fn(4, 4, |r, c| low[(r & 1, c & 1)] * high[(r >> 1, c >> 1)])
}

pub(crate) fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("{what} probability {p} outside [0, 1]"));
    }
    Ok(())
}

impl KrausChannel {
    /// Validates completeness `Σ K†K = I` and drops zero operators.
    pub fn new(operators: Vec<DMatrix<C>>, arity: usize) -> Result<Self> {
        if !(1..=2).contains(&arity) {
            return invalid(format!("channel arity must be 1 or 2, got {arity}"));
        }
        let dim = 1usize << arity;
        let operators: Vec<DMatrix<C>> = operators
            .into_iter()
            .filter(|k| max_abs(k) > DROP_TOLERANCE)
            .collect();
        if operators.is_empty() {
            return invalid("channel has no operators");
        }
        let mut sum = DMatrix::<C>::zeros(dim, dim);
        for k in &operators {
            if k.shape() != (dim, dim) {
                return invalid(format!("Kraus operator shape {:?}, expected {dim}x{dim}", k.shape()));
            }
            sum += k.adjoint() * k;
        }
        let defect = max_abs(&(sum - DMatrix::<C>::identity(dim, dim)));
        if defect > COMPLETENESS_TOLERANCE {
            return invalid(format!("Kraus operators are not complete (defect {defect:e})"));
        }
        let selection = Self::classify(&operators, dim);
        Ok(Self {
            operators,
            arity,
            selection,
        })
    }

    fn classify(operators: &[DMatrix<C>], dim: usize) -> Selection {
        let eye = DMatrix::<C>::identity(dim, dim);
        let mut probs = Vec::with_capacity(operators.len());
        let mut identity = Vec::with_capacity(operators.len());
        for k in operators {
            let kk = k.adjoint() * k;
            let c = kk.trace().re / dim as f64;
            if max_abs(&(kk - eye.map(|e| e * c))) > 1e-12 {
                return Selection::StateDependent;
            }
            probs.push(c);
            let root = c.sqrt();
            identity.push(max_abs(&(k - eye.map(|e| e * root))) < 1e-12);
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Selection::Fixed { cumulative, identity }
    }

    pub fn identity(arity: usize) -> Result<Self> {
        let dim = 1usize << arity.min(2);
        Self::new(vec![DMatrix::identity(dim, dim)], arity)
    }

    pub fn operators(&self) -> &[DMatrix<C>] {
        &self.operators
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// True when the only operator is (a multiple of) the identity.
    pub fn is_identity(&self) -> bool {
        matches!(&self.selection, Selection::Fixed { identity, .. } if identity.len() == 1 && identity[0])
    }

    /// Stochastically applies one Kraus branch to `amps` on `qubits` and
    /// renormalizes.
    pub(crate) fn apply_stochastic(&self, amps: &mut [C], qubits: &[usize], rng: &mut Rng, scratch: &mut Vec<C>) {
        debug_assert_eq!(qubits.len(), self.arity);
        match &self.selection {
            Selection::Fixed { cumulative, identity } => {
                let u = rng.uniform() * cumulative.last().copied().unwrap_or(1.0);
                let i = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                if identity[i] {
                    return;
                }
                apply_local(&self.operators[i], amps, qubits);
                renormalize(amps);
            }
            Selection::StateDependent => {
                let u = rng.uniform();
                let mut acc = 0.0;
                let last = self.operators.len() - 1;
                for (i, k) in self.operators.iter().enumerate() {
                    scratch.clear();
                    scratch.extend_from_slice(amps);
                    apply_local(k, scratch, qubits);
                    acc += scratch.iter().map(|a| a.norm_sqr()).sum::<f64>();
                    if u < acc || i == last {
                        amps.copy_from_slice(scratch);
                        renormalize(amps);
                        return;
                    }
                }
            }
        }
    }
}

fn renormalize(amps: &mut [C]) {
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for a in amps.iter_mut() {
            *a /= n;
        }
    }
}

/// Applies a 2×2 or 4×4 local operator in place.
pub(crate) fn apply_local(op: &DMatrix<C>, amps: &mut [C], qubits: &[usize]) {
    match qubits {
        [q] => {
            let m = [[op[(0, 0)], op[(0, 1)]], [op[(1, 0)], op[(1, 1)]]];
            crate::circuit::sim::apply_single(amps, *q, &m);
        }
        [q0, q1] => {
            let (m0, m1) = (1usize << q0, 1usize << q1);
            for base in 0..amps.len() {
                if base & (m0 | m1) != 0 {
                    continue;
                }
                let idx = [base, base | m0, base | m1, base | m0 | m1];
                let v = idx.map(|i| amps[i]);
                for (r, &i) in idx.iter().enumerate() {
                    amps[i] = (0..4).map(|c| op[(r, c)] * v[c]).sum();
                }
            }
        }
        _ => unreachable!("channels act on one or two qubits"),
    }
}

/// `{√(1−p)·I, √p·X}`.
pub fn bit_flip_channel(p: f64) -> Result<KrausChannel> {
    check_probability(p, "bit-flip")?;
    KrausChannel::new(
        vec![pauli(0).scale((1.0 - p).sqrt()), pauli(1).scale(p.sqrt())],
        1,
    )
}

/// `√(1−p)·I` plus `√(p/(4^arity − 1))·P` for each non-identity Pauli string.
pub fn depolarizing_channel(p: f64, arity: usize) -> Result<KrausChannel> {
    check_probability(p, "depolarizing")?;
    let strings: Vec<DMatrix<C>> = match arity {
        1 => (0..4).map(pauli).collect(),
        2 => (0..16).map(|k| local_kron(&pauli(k & 3), &pauli(k >> 2))).collect(),
        _ => return invalid(format!("depolarizing arity must be 1 or 2, got {arity}")),
    };
    let rest = (p / (strings.len() - 1) as f64).sqrt();
    let ops = strings
        .into_iter()
        .enumerate()
        .map(|(k, s)| if k == 0 { s.scale((1.0 - p).sqrt()) } else { s.scale(rest) })
        .collect();
    KrausChannel::new(ops, arity)
}

/// Amplitude damping with `γ = 1 − e^{−t/T1}` composed with the pure
/// dephasing that brings the total coherence decay to `e^{−t/T2}`.
/// Times: `t1_us`, `t2_us` in microseconds, `duration_ns` in nanoseconds.
pub fn thermal_relaxation_channel(t1_us: f64, t2_us: f64, duration_ns: f64) -> Result<KrausChannel> {
    if !(t1_us > 0.0) || !(t2_us > 0.0) {
        return invalid("T1 and T2 must be positive");
    }
    if !(duration_ns >= 0.0) || !duration_ns.is_finite() {
        return invalid(format!("duration {duration_ns} ns must be finite and non-negative"));
    }
    if t2_us > t1_us {
        return Err(Error::UnsupportedRegime(format!(
            "T2 = {t2_us} us exceeds T1 = {t1_us} us"
        )));
    }
    let t = duration_ns * 1e-3;
    let gamma = -(-t / t1_us).exp_m1();
    // Amplitude damping alone leaves coherence e^{-t/(2 T1)}; dephasing supplies the rest.
    let dephase_rate = 1.0 / t2_us - 0.5 / t1_us;
    let lambda = -(-2.0 * t * dephase_rate).exp_m1();
    let z = C::new(0.0, 0.0);
    let r = |x: f64| C::new(x, 0.0);
    let a0 = DMatrix::from_row_slice(2, 2, &[r(1.0), z, z, r((1.0 - gamma).sqrt())]);
    let a1 = DMatrix::from_row_slice(2, 2, &[z, r(gamma.sqrt()), z, z]);
    let p0 = DMatrix::from_row_slice(2, 2, &[r(1.0), z, z, r((1.0 - lambda).sqrt())]);
    let p1 = DMatrix::from_row_slice(2, 2, &[z, z, z, r(lambda.sqrt())]);
    let ops = vec![&a0 * &p0, &a0 * &p1, &a1 * &p0, &a1 * &p1];
    KrausChannel::new(ops, 1)
}
