//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line per criterion with its wall time against the limit, and fails if any
//! criterion misses either its bound or its time limit.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use qsnap_core::circuit::{ancilla_expectation, build_swap_test, execute_statevector, mottonen_prepare};
use qsnap_core::estimators::{
    train_gradient, train_qeswap, Candidate, FidelityOracle, GradientConfig, Method, OracleMode,
    QeswapConfig, Representation, SwapTestOracle,
};
use qsnap_core::state::{half_chain_entropy, random_pure_state, StateVector};
use qsnap_core::store::{self, SnapshotMetadata, SnapshotRecord};
use qsnap_core::{Complex64, Error, Rng};
use qsnap_harness::emit::load_cohort;
use qsnap_harness::entropy::run_entropy_analysis;
use qsnap_harness::experiment::{with_budget, ExperimentSpec, NoiseSetting};
use qsnap_harness::mixed::{run_mixed_state_diagnostic, MixedDiagnosticConfig};
use qsnap_harness::standard::{by_name, run_standard_states};
use qsnap_harness::{run_cohort, CohortSummary, RunSettings};

/// Exact `|⟨a|b⟩|²` computed directly from the amplitudes.
fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

fn zero(n: usize) -> StateVector {
    StateVector::zero(n).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn swap_test_correctness() -> Outcome {
    let mut rng = Rng::new(101);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = 1 + i % 3;
        let a: StateVector = random_pure_state(n, &mut rng).unwrap();
        let b: StateVector = random_pure_state(n, &mut rng).unwrap();
        let c = build_swap_test(n, &mottonen_prepare(&a).unwrap(), &mottonen_prepare(&b).unwrap()).unwrap();
        let z = ancilla_expectation(&c).unwrap();
        worst = worst.max((z - overlap(a.amplitudes(), b.amplitudes())).abs());
    }
    outcome(worst <= 1e-9, format!("max |<Z> - |<a|b>|^2| = {worst:.2e} (bound 1e-9)"))
}

fn mottonen_preparation() -> Outcome {
    let mut rng = Rng::new(202);
    let mut worst = 1.0f64;
    for n in 1..=4 {
        for _ in 0..100 {
            let s: StateVector = random_pure_state(n, &mut rng).unwrap();
            let out = execute_statevector(&mottonen_prepare(&s).unwrap(), &zero(n)).unwrap();
            worst = worst.min(overlap(s.amplitudes(), out.amplitudes()));
        }
    }
    outcome(worst >= 1.0 - 1e-9, format!("min fidelity = 1 - {:.2e} (bound 1 - 1e-9)", 1.0 - worst))
}

fn qeswap_cohort(n: usize, seed: u64) -> CohortSummary {
    let mut spec = ExperimentSpec::new(Method::Qeswap, Representation::StateVector, n);
    spec.n_trials = 20;
    spec.seed = seed;
    run_cohort(&spec).unwrap()
}

fn noiseless_qeswap(stored: &Path) -> Outcome {
    let limits = [15.0, 21.0, 39.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let summary = qeswap_cohort(n, 300 + n as u64);
        qsnap_harness::emit::emit_cohort(&summary, &stored.join(format!("n{n}"))).unwrap();
        let s = summary.threshold(0.99).unwrap();
        let mean = s.mean_epochs.unwrap_or(f64::INFINITY);
        pass &= s.pass_rate >= 0.9 && mean <= limits[n - 1];
        parts.push(format!("n={n}: pass {:.2}, mean iters {mean:.2} (<= {})", s.pass_rate, limits[n - 1]));
    }
    outcome(pass, parts.join("; "))
}

fn noiseless_gradient() -> Outcome {
    let mut spec = ExperimentSpec::new(Method::Gradient, Representation::StateVector, 1);
    spec.n_trials = 10;
    spec.seed = 400;
    spec.add_thresholds(&[0.999]);
    let summary = run_cohort(&spec).unwrap();
    let s = summary.threshold(0.999).unwrap();
    outcome(
        s.pass_rate >= 0.8,
        format!("{}/10 reach 0.999 within 200 epochs, mean epochs {:.1}", s.reached, s.mean_epochs.unwrap_or(f64::NAN)),
    )
}

fn noisy_qeswap() -> Outcome {
    let mut spec = ExperimentSpec::new(Method::Qeswap, Representation::StateVector, 1).with_noise(NoiseSetting::device());
    spec.engine = with_budget(&spec.engine, 50);
    spec.n_trials = 10;
    spec.seed = 500;
    let summary = run_cohort(&spec).unwrap();
    let s = summary.threshold(0.99).unwrap();
    outcome(
        s.pass_rate >= 0.8,
        format!(
            "{}/10 reach 0.99 within 50 iterations, mean iters {:.1}, mean best {:.4}",
            s.reached,
            s.mean_epochs.unwrap_or(f64::NAN),
            summary.mean_fidelity.unwrap_or(f64::NAN)
        ),
    )
}

fn standard_states() -> Outcome {
    let settings = RunSettings::new(Method::Qeswap, Representation::StateVector);
    let rows = run_standard_states(&settings, &[1, 2, 3], 600);
    let budget = |family: &str| match family {
        "zero_one" | "plus_minus" => 12,
        "basis2" => 18,
        "bell" => 21,
        "ghz3" => 39,
        other => panic!("unknown family {other}"),
    };
    let misses: Vec<String> = rows
        .iter()
        .filter(|r| !(r.epochs.is_some_and(|e| e <= budget(&r.family)) && r.fidelity.is_some_and(|f| f >= 0.99)))
        .map(|r| format!("{} ({:?} epochs)", r.state, r.epochs))
        .collect();
    let worst = rows.iter().filter_map(|r| r.epochs.map(|e| e as f64 / budget(&r.family) as f64)).fold(0.0, f64::max);
    outcome(
        misses.is_empty() && rows.len() == 20,
        if misses.is_empty() {
            format!("20/20 states within budget, worst epochs/budget {worst:.2}")
        } else {
            format!("missed: {}", misses.join(", "))
        },
    )
}

fn entropy_matching(stored: &Path) -> Outcome {
    let phi = by_name("phi+").unwrap().vector;
    let anchor = half_chain_entropy(&phi).unwrap();
    let mut pass = (anchor - 1.0).abs() <= 1e-9;
    let mut checked = 0;
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let cohort = load_cohort(&stored.join(format!("n{n}"))).unwrap();
        let analysis = run_entropy_analysis(&cohort).unwrap();
        for row in analysis.rows.iter().filter(|r| r.fidelity.is_some_and(|f| f >= 0.99)) {
            let d = row.abs_diff.unwrap();
            checked += 1;
            worst = worst.max(d);
            pass &= d <= 0.05;
        }
    }
    pass &= checked > 0;
    outcome(pass, format!("{checked} matched trials, max |dS| = {worst:.4} (bound 0.05); Bell S = {anchor:.12}"))
}

fn mixed_limitation() -> Outcome {
    let diag = run_mixed_state_diagnostic(&MixedDiagnosticConfig { seed: 800, ..MixedDiagnosticConfig::default() }).unwrap();
    let s = &diag.summary;
    outcome(
        2 * s.plateaued > s.trials && s.recovered == s.trials,
        format!(
            "signal-driven <= 0.95 on {}/{} (mean {:.3}); Uhlmann-driven >= 0.99 on {}/{} (mean {:.4})",
            s.plateaued,
            s.trials,
            s.mean_signal_uhlmann.unwrap_or(f64::NAN),
            s.recovered,
            s.trials,
            s.mean_uhlmann_driven.unwrap_or(f64::NAN)
        ),
    )
}

fn store_round_trip() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(900);
    let (mut identical, mut prepared, mut detected) = (0, 0, 0);
    for i in 0..50 {
        let n = 1 + i % 4;
        let s: StateVector = random_pure_state(n, &mut rng).unwrap();
        let record = SnapshotRecord::from_state(&s, SnapshotMetadata::now("qeswap", "statevector", 1.0, 0, i as u64, "cycle"));
        let id = store::deposit(&record, dir.path()).unwrap();
        let body_path = dir.path().join(format!("{id}.qsnap"));
        let body = std::fs::read(&body_path).unwrap();
        if body == record.body() && store::read_record(&id, dir.path()).unwrap().body() == body {
            identical += 1;
        }
        let (_, circuit) = store::withdraw(&id, dir.path()).unwrap();
        let out = execute_statevector(&circuit, &zero(n)).unwrap();
        if overlap(s.amplitudes(), out.amplitudes()) >= 1.0 - 1e-9 {
            prepared += 1;
        }
        let mut mutated = body.clone();
        let pos = (rng.next_u64() % body.len() as u64) as usize;
        mutated[pos] ^= 1 << (rng.next_u64() % 8);
        std::fs::write(&body_path, &mutated).unwrap();
        if matches!(store::withdraw(&id, dir.path()), Err(Error::Integrity(_))) {
            detected += 1;
        }
        std::fs::write(&body_path, &body).unwrap();
    }
    outcome(
        identical == 50 && prepared == 50 && detected == 50,
        format!("bit-identical {identical}/50, prepared {prepared}/50, mutations detected {detected}/50"),
    )
}

struct Counting<'a> {
    inner: &'a SwapTestOracle,
    calls: AtomicU64,
}

impl FidelityOracle for Counting<'_> {
    fn evaluate(&self, c: &Candidate) -> qsnap_core::Result<f64> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(c)
    }
}

fn oracle_accounting() -> Outcome {
    let mut rng = Rng::new(1000);
    let mut failures = Vec::new();
    for n in 1..=2 {
        let d = 1u64 << n;
        let target: StateVector = random_pure_state(n, &mut rng).unwrap();
        let oracle = SwapTestOracle::new(mottonen_prepare(&target).unwrap(), OracleMode::Analytic, 1).unwrap();

        let counting = Counting { inner: &oracle, calls: AtomicU64::new(0) };
        let cfg = GradientConfig { epochs: 3, threshold: 2.0, seed: n as u64, ..GradientConfig::default() };
        let r = train_gradient(&counting, n, Representation::StateVector, &cfg, None).unwrap();
        let calls = counting.calls.load(Ordering::SeqCst);
        if !(r.epochs == 3 && calls == 3 * (1 + 4 * d) && r.oracle_evals == calls) {
            failures.push(format!("gradient n={n}: {calls} calls, {} reported", r.oracle_evals));
        }

        for (max_iter, threshold) in [(4, 2.0), (100, 0.9)] {
            let counting = Counting { inner: &oracle, calls: AtomicU64::new(0) };
            let cfg = QeswapConfig { max_iter, threshold, seed: 7, ..QeswapConfig::default() };
            let r = train_qeswap(&counting, n, Representation::StateVector, &cfg, None).unwrap();
            let calls = counting.calls.load(Ordering::SeqCst);
            if !(calls == r.epochs as u64 * 50 && r.oracle_evals == calls) {
                failures.push(format!("qeswap n={n}: {calls} calls over {} iterations", r.epochs));
            }
        }
    }
    outcome(failures.is_empty(), if failures.is_empty() { "all counts exact".into() } else { failures.join("; ") })
}

#[test]
fn all_criteria() {
    let stored = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("swap test correctness", 10, Box::new(swap_test_correctness)),
        ("mottonen preparation", 30, Box::new(mottonen_preparation)),
        ("noiseless qeswap convergence", 600, Box::new(|| noiseless_qeswap(stored.path()))),
        ("noiseless gradient convergence", 900, Box::new(noiseless_gradient)),
        ("noisy qeswap", 1800, Box::new(noisy_qeswap)),
        ("standard-state benchmark", 300, Box::new(standard_states)),
        ("entropy matching on stored cohorts", 60, Box::new(|| entropy_matching(stored.path()))),
        ("mixed-state limitation", 1200, Box::new(mixed_limitation)),
        ("snapshot store round trip", 10, Box::new(store_round_trip)),
        ("oracle accounting", 60, Box::new(oracle_accounting)),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*limit);
        let pass = result.pass && in_time;
        writeln!(
            out,
            "criterion {:>2} {} {name}: {} [{:.1}s, limit {limit}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        )
        .unwrap();
        out.flush().unwrap();
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
