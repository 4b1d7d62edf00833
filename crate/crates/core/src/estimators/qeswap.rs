use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::Rng;

use super::decode::{decode_for_oracle, Reconstruction};
use super::oracle::FidelityOracle;
use super::report::ReconstructionReport;
use super::{Method, Representation, Validator};

/// Below this population spread the iteration's update is skipped.
pub const MIN_SPREAD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeswapConfig {
    pub population: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub max_iter: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for QeswapConfig {
    fn default() -> Self {
        Self {
            population: 50,
            sigma: 0.1,
            alpha: 0.05,
            max_iter: 100,
            threshold: 0.999,
            seed: 0,
        }
    }
}

/// `A_i = (F_i − F̄)/std(F)` with the population standard deviation, or
/// `None` when the spread is below [`MIN_SPREAD`].
pub fn advantages(fitness: &[f64]) -> Option<Vec<f64>> {
    let n = fitness.len() as f64;
    let mean = fitness.iter().sum::<f64>() / n;
    let std = (fitness.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n).sqrt();
    (std >= MIN_SPREAD).then(|| fitness.iter().map(|f| (f - mean) / std).collect())
}

/// Parameter step `α/(Nσ) Σ A_i z_i`, or `None` if the update is skipped.
pub fn es_step(noise: &[Vec<f64>], fitness: &[f64], sigma: f64, alpha: f64) -> Option<Vec<f64>> {
    let adv = advantages(fitness)?;
    let len = noise.first().map_or(0, Vec::len);
    let scale = alpha / (noise.len() as f64 * sigma);
    let mut step = vec![0.0; len];
    for (a, z) in adv.iter().zip(noise) {
        for (s, zi) in step.iter_mut().zip(z) {
            *s += scale * a * zi;
        }
    }
    Some(step)
}

/// Evolution-strategy search over raw parameters decoded for `repr`.
/// Each iteration costs exactly `population` evaluations.
pub fn train_qeswap(
    oracle: &dyn FidelityOracle,
    n_qubits: usize,
    repr: Representation,
    config: &QeswapConfig,
    validator: Option<&Validator<'_>>,
) -> Result<ReconstructionReport> {
    if config.population < 2 || !(config.sigma > 0.0) || !(config.alpha > 0.0) || config.max_iter == 0 {
        return invalid("QESwap needs population ≥ 2, sigma > 0, alpha > 0, max_iter ≥ 1");
    }
    let len = repr.raw_len(n_qubits)?;
    let start = Instant::now();
    let mut rng = Rng::new(config.seed);
    let mut w = rng.normal_vec(len);
    let mut trace = Vec::with_capacity(config.max_iter);
    let mut validation = Vec::new();
    let mut evals = 0u64;
    let mut best: Option<(f64, Vec<f64>, Reconstruction)> = None;
    for _ in 0..config.max_iter {
        let noise: Vec<Vec<f64>> = (0..config.population).map(|_| rng.normal_vec(len)).collect();
        let mut fitness = Vec::with_capacity(config.population);
        for z in &noise {
            let raw: Vec<f64> = w.iter().zip(z).map(|(a, b)| a + config.sigma * b).collect();
            let (recon, candidate) = decode_for_oracle(repr, &raw)?;
            let f = oracle.evaluate(&candidate)?;
            evals += 1;
            if best.as_ref().is_none_or(|b| f > b.0) {
                best = Some((f, raw, recon));
            }
            fitness.push(f);
        }
        let top = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        trace.push(top);
        if let Some(step) = es_step(&noise, &fitness, config.sigma, config.alpha) {
            for (wi, s) in w.iter_mut().zip(step) {
                *wi += s;
            }
        }
        if let Some(v) = validator {
            validation.push(v(&decode_for_oracle(repr, &w)?.0));
        }
        if top >= config.threshold {
            break;
        }
    }
    let (best_fidelity, best_raw, candidate) = best.expect("at least one iteration ran");
    Ok(ReconstructionReport {
        method: Method::Qeswap,
        representation: repr,
        n_qubits,
        best_fidelity,
        epochs: trace.len(),
        oracle_evals: evals,
        fidelity_trace: trace,
        wall_time_s: start.elapsed().as_secs_f64(),
        mixed_state_flag: repr == Representation::Density,
        seed: config.seed,
        candidate: Some(candidate),
        best_raw,
        validation_trace: validation,
    })
}
