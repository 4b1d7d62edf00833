use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qsnap_core::circuit::mottonen_prepare;
use qsnap_core::estimators::*;
use qsnap_core::state::{overlap_fidelity, random_pure_state, unitarity_defect, StateVector};
use qsnap_core::{Error, Rng};

fn analytic_oracle(target: &StateVector) -> SwapTestOracle {
    SwapTestOracle::new(mottonen_prepare(target).unwrap(), OracleMode::Analytic, 0).unwrap()
}

fn small_gradient(seed: u64) -> GradientConfig {
    GradientConfig {
        epochs: 5,
        seed,
        hidden: vec![16, 16],
        latent_dim: 8,
        ..GradientConfig::default()
    }
}

/// Counts calls and otherwise forwards to an inner oracle. Estimators only
/// get a `&dyn FidelityOracle`, so this is the whole access surface.
struct Spy<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O: FidelityOracle> FidelityOracle for Spy<O> {
    fn evaluate(&self, candidate: &Candidate) -> qsnap_core::Result<f64> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(candidate)
    }
}

struct Constant(f64);

impl FidelityOracle for Constant {
    fn evaluate(&self, _: &Candidate) -> qsnap_core::Result<f64> {
        Ok(self.0)
    }
}

#[test]
fn decode_state_examples() {
    let s = decode_candidate_state(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(s, StateVector::zero(1).unwrap());
    let s = decode_candidate_state(&[0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(s.amplitudes()[1], C::new(0.0, 1.0));
    let one = StateVector::basis(1, 1).unwrap();
    assert!((overlap_fidelity(&s, &one).unwrap() - 1.0).abs() < 1e-15);
    let s = decode_candidate_state(&[3.0, 0.0, 4.0, 0.0]).unwrap();
    assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
    assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-15);
    assert!(decode_candidate_state(&[0.0; 4]).is_err());
    assert!(decode_candidate_state(&[1.0; 6]).is_err());
}

fn encode(m: &DMatrix<C>) -> Vec<f64> {
    let mut raw = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            raw.push(m[(r, c)].re);
            raw.push(m[(r, c)].im);
        }
    }
    raw
}

#[test]
fn decode_unitary_examples() {
    for scale in [1.0, 2.0] {
        let m = DMatrix::<C>::identity(2, 2).map(|z| z * scale);
        let u = decode_candidate_unitary(&encode(&m)).unwrap();
        assert!((u.entries() - DMatrix::<C>::identity(2, 2)).iter().all(|z| z.norm() < 1e-15));
    }
    let mut rng = Rng::new(3);
    for k in 0..50 {
        let n = 1 + k % 3;
        let d = 1usize << n;
        let raw = rng.normal_vec(2 * d * d);
        let u = decode_candidate_unitary(&raw).unwrap();
        // Oracle: explicit Q†Q product.
        let q = u.entries();
        let prod = q.adjoint() * q;
        let err = (prod - DMatrix::<C>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "defect {err}");
        assert!(unitarity_defect(q) < 1e-10);
    }
    let singular = encode(&DMatrix::<C>::from_element(2, 2, C::new(1.0, 0.0)));
    assert!(matches!(decode_candidate_unitary(&singular), Err(Error::RankDeficient(_))));
    let (recon, cand) = decode_for_oracle(Representation::Unitary, &singular).unwrap();
    assert!(matches!(recon, Reconstruction::Unitary(_)));
    assert!(matches!(cand, Candidate::State(_)));
}

#[test]
fn unitary_candidate_is_first_column() {
    let raw = Rng::new(9).normal_vec(8);
    let u = decode_candidate_unitary(&raw).unwrap();
    let (_, cand) = decode_for_oracle(Representation::Unitary, &raw).unwrap();
    let Candidate::State(s) = cand else { panic!("expected a state") };
    for k in 0..2 {
        assert!((s.amplitudes()[k] - u.entries()[(k, 0)]).norm() < 1e-15);
    }
}

#[test]
fn decode_density_examples() {
    let diag = encode(&DMatrix::from_row_slice(2, 2, &[C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]));
    let rho = decode_candidate_density(&diag).unwrap();
    assert!((rho.entries()[(0, 0)].re - 1.0).abs() < 1e-15);
    assert!(rho.entries()[(1, 1)].norm() < 1e-15);
    let rho = decode_candidate_density(&encode(&DMatrix::<C>::identity(2, 2))).unwrap();
    assert!((rho.entries()[(0, 0)].re - 0.5).abs() < 1e-15 && (rho.entries()[(1, 1)].re - 0.5).abs() < 1e-15);
    assert!(decode_candidate_density(&[0.0; 8]).is_err());

    let mut rng = Rng::new(12);
    for k in 0..50 {
        let d = 1usize << (1 + k % 2);
        let rho = decode_candidate_density(&rng.normal_vec(2 * d * d)).unwrap();
        let m = rho.entries();
        assert!((m - m.adjoint()).iter().all(|z| z.norm() < 1e-10));
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        // Oracle: independent Hermitian eigendecomposition.
        let eig = m.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-9));
    }
}

#[test]
fn decoded_states_have_unit_norm() {
    let mut rng = Rng::new(21);
    for len in [4, 8, 16] {
        for _ in 0..20 {
            let s = decode_candidate_state(&rng.normal_vec(len)).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn gradient_eval_accounting_matches_spy() {
    let target = StateVector::basis(1, 1).unwrap();
    for repr in [Representation::StateVector, Representation::Unitary, Representation::Density] {
        let spy = Spy { inner: analytic_oracle(&target), calls: AtomicU64::new(0) };
        let r = train_gradient(&spy, 1, repr, &small_gradient(3), None).unwrap();
        let raw_len = repr.raw_len(1).unwrap() as u64;
        assert_eq!(r.oracle_evals, r.epochs as u64 * (1 + 2 * raw_len));
        assert_eq!(spy.calls.load(Ordering::SeqCst), r.oracle_evals);
        assert_eq!(spy.inner.evaluations(), r.oracle_evals);
    }
}

#[test]
fn statevector_gradient_accounting_is_one_plus_four_d() {
    let spy = Spy { inner: analytic_oracle(&StateVector::zero(2).unwrap()), calls: AtomicU64::new(0) };
    let r = train_gradient(&spy, 2, Representation::StateVector, &small_gradient(1), None).unwrap();
    assert_eq!(r.oracle_evals, r.epochs as u64 * (1 + 4 * 4));
}

#[test]
fn qeswap_eval_accounting_matches_spy() {
    let spy = Spy { inner: analytic_oracle(&StateVector::basis(2, 3).unwrap()), calls: AtomicU64::new(0) };
    let cfg = QeswapConfig { population: 7, max_iter: 9, threshold: 2.0, seed: 4, ..QeswapConfig::default() };
    let r = train_qeswap(&spy, 2, Representation::StateVector, &cfg, None).unwrap();
    assert_eq!(r.epochs, 9);
    assert_eq!(r.oracle_evals, 9 * 7);
    assert_eq!(spy.calls.load(Ordering::SeqCst), 63);
}

#[test]
fn constant_oracle_stops_after_one_epoch() {
    let r = train_gradient(&Constant(1.0), 1, Representation::StateVector, &small_gradient(0), None).unwrap();
    assert_eq!(r.epochs, 1);
    assert_eq!(r.best_fidelity, 1.0);
    let r = train_qeswap(&Constant(1.0), 1, Representation::StateVector, &QeswapConfig::default(), None).unwrap();
    assert_eq!(r.epochs, 1);
}

#[test]
fn finite_difference_gradient_is_stable_under_smaller_step() {
    let mut rng = Rng::new(33);
    let target: StateVector = random_pure_state(1, &mut rng).unwrap();
    let oracle = analytic_oracle(&target);
    let raw = rng.normal_vec(4);
    let coarse = loss_gradient(&oracle, Representation::StateVector, &raw, 1e-3).unwrap();
    let fine = loss_gradient(&oracle, Representation::StateVector, &raw, 1e-4).unwrap();
    let scale = fine.iter().map(|g| g.abs()).fold(0.0, f64::max);
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a - b).abs() <= 1e-3 * scale, "{a} vs {b}");
    }
}

#[test]
fn es_update_is_translation_invariant() {
    let mut rng = Rng::new(5);
    let noise: Vec<Vec<f64>> = (0..20).map(|_| rng.normal_vec(6)).collect();
    let fitness: Vec<f64> = (0..20).map(|_| rng.uniform()).collect();
    let base = es_step(&noise, &fitness, 0.1, 0.05).unwrap();
    for c in [-0.7, 0.3, 12.5] {
        let shifted: Vec<f64> = fitness.iter().map(|f| f + c).collect();
        let step = es_step(&noise, &shifted, 0.1, 0.05).unwrap();
        for (a, b) in base.iter().zip(&step) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn es_update_skipped_without_spread() {
    let noise = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.3, 0.3]];
    assert!(es_step(&noise, &[0.4, 0.4, 0.4], 0.1, 0.05).is_none());
    let a = advantages(&[1.0, 2.0, 3.0]).unwrap();
    let expected = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
    for (x, y) in a.iter().zip(expected) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn qeswap_with_flat_oracle_keeps_mean() {
    // Flat fitness: w never moves, so every validation value is the same.
    let v = |r: &Reconstruction| r.state().unwrap().amplitudes()[0].re;
    let cfg = QeswapConfig { max_iter: 5, threshold: 2.0, ..QeswapConfig::default() };
    let r = train_qeswap(&Constant(0.5), 1, Representation::StateVector, &cfg, Some(&v)).unwrap();
    assert_eq!(r.validation_trace.len(), 5);
    assert!(r.validation_trace.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn report_invariants_and_json_schema() {
    let target = StateVector::basis(1, 0).unwrap();
    let oracle = analytic_oracle(&target);
    let cfg = QeswapConfig { seed: 2, ..QeswapConfig::default() };
    let r = train_qeswap(&oracle, 1, Representation::StateVector, &cfg, None).unwrap();
    let max = r.fidelity_trace.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(r.best_fidelity, max);
    assert!(r.best_so_far().windows(2).all(|w| w[0] <= w[1]));
    assert!(r.best_fidelity >= 0.99 && r.epochs <= 20);

    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(
        keys,
        ["best_fidelity", "epochs", "fidelity_trace", "method", "mixed_state_flag", "n_qubits", "oracle_evals", "representation", "seed", "wall_time_s"]
    );
    assert_eq!(json["method"], "qeswap");
    assert_eq!(json["representation"], "statevector");
}

#[test]
fn gradient_reaches_zero_target() {
    let oracle = analytic_oracle(&StateVector::zero(1).unwrap());
    let cfg = GradientConfig { seed: 7, ..GradientConfig::default() };
    let r = train_gradient(&oracle, 1, Representation::StateVector, &cfg, None).unwrap();
    assert!(r.best_fidelity >= 0.99, "best {}", r.best_fidelity);
    assert!(r.epochs <= 200);
}

#[test]
fn reconstruct_dispatch() {
    let plus = StateVector::from_amplitudes(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
    let oracle = analytic_oracle(&plus);
    let qeswap = EngineConfig::Qeswap(QeswapConfig { seed: 11, ..QeswapConfig::default() });
    let r = reconstruct(Representation::StateVector, &oracle, 1, &qeswap, None).unwrap();
    assert!(r.best_fidelity >= 0.99);
    assert!(!r.mixed_state_flag);

    let oracle = analytic_oracle(&StateVector::zero(1).unwrap());
    let cfg = EngineConfig::Qeswap(QeswapConfig { seed: 5, max_iter: 40, ..QeswapConfig::default() });
    let r = reconstruct(Representation::Unitary, &oracle, 1, &cfg, None).unwrap();
    assert!(r.best_fidelity >= 0.99, "unitary best {}", r.best_fidelity);
    assert!(matches!(r.candidate, Some(Reconstruction::Unitary(_))));

    let r = reconstruct(Representation::Density, &oracle, 1, &cfg, None).unwrap();
    assert!(r.mixed_state_flag);
    assert!(matches!(r.candidate, Some(Reconstruction::Density(_))));

    assert!(reconstruct(Representation::StateVector, &oracle, 1, &EngineConfig::Qeswap(QeswapConfig { population: 1, ..QeswapConfig::default() }), None).is_err());
}

#[test]
fn oracle_rejects_width_mismatch_and_is_deterministic_with_shots() {
    let target = StateVector::from_amplitudes(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
    let oracle = SwapTestOracle::new(mottonen_prepare(&target).unwrap(), OracleMode::Shots(1000), 9).unwrap();
    let zero = Candidate::State(StateVector::zero(1).unwrap());
    let a: Vec<f64> = (0..3).map(|_| oracle.evaluate(&zero).unwrap()).collect();
    let again = SwapTestOracle::new(mottonen_prepare(&target).unwrap(), OracleMode::Shots(1000), 9).unwrap();
    let b: Vec<f64> = (0..3).map(|_| again.evaluate(&zero).unwrap()).collect();
    assert_eq!(a, b);
    assert!(a.iter().all(|f| (f - 0.5).abs() < 0.1));
    // Failed calls still count.
    assert!(oracle.evaluate(&Candidate::State(StateVector::zero(2).unwrap())).is_err());
    assert_eq!(oracle.evaluations(), 4);
    assert!(SwapTestOracle::new(mottonen_prepare(&target).unwrap(), OracleMode::Shots(0), 0).is_err());
}

#[test]
fn mixed_target_oracle_measures_hilbert_schmidt() {
    use qsnap_core::state::{hilbert_schmidt_overlap, DensityMatrix};
    let mut rng = Rng::new(40);
    let a: StateVector = random_pure_state(2, &mut rng).unwrap();
    let b: StateVector = random_pure_state(2, &mut rng).unwrap();
    let sigma = DensityMatrix::mixture(&[(0.7, a.clone()), (0.3, b.clone())]).unwrap();
    let oracle = SwapTestOracle::ensemble(
        vec![(0.7, mottonen_prepare(&a).unwrap()), (0.3, mottonen_prepare(&b).unwrap())],
        OracleMode::Analytic,
        0,
    )
    .unwrap();
    let rho = decode_candidate_density(&rng.normal_vec(32)).unwrap();
    let f = oracle.evaluate(&Candidate::Density(rho.clone())).unwrap();
    assert!((f - hilbert_schmidt_overlap(&rho, &sigma).unwrap()).abs() < 1e-9);
}
