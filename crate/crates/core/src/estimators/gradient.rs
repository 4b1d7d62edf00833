use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::Rng;

use super::decode::{decode_for_oracle, Reconstruction};
use super::network::{AdamState, GeneratorNetwork};
use super::oracle::FidelityOracle;
use super::report::ReconstructionReport;
use super::{Method, Representation, Validator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    pub epochs: usize,
    pub lr: f64,
    pub fd_epsilon: f64,
    pub scaling_factor: f64,
    pub threshold: f64,
    pub seed: u64,
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 1e-4,
            fd_epsilon: 1e-3,
            scaling_factor: 100.0,
            threshold: 0.999,
            seed: 0,
            latent_dim: 256,
            hidden: vec![512, 1024, 1024, 512, 256],
        }
    }
}

/// Central-difference gradient of `1 − F(decode(raw))` with respect to `raw`.
/// Costs `2·raw.len()` oracle evaluations.
pub fn loss_gradient(
    oracle: &dyn FidelityOracle,
    repr: Representation,
    raw: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>> {
    let mut probe = raw.to_vec();
    let mut grad = Vec::with_capacity(raw.len());
    for i in 0..raw.len() {
        probe[i] = raw[i] + epsilon;
        let up = oracle.evaluate(&decode_for_oracle(repr, &probe)?.1)?;
        probe[i] = raw[i] - epsilon;
        let down = oracle.evaluate(&decode_for_oracle(repr, &probe)?.1)?;
        probe[i] = raw[i];
        grad.push(-(up - down) / (2.0 * epsilon));
    }
    Ok(grad)
}

/// Trains a generator network whose output, decoded for `repr`, maximizes
/// the oracle fidelity. Each epoch costs `1 + 2·raw_len` evaluations.
pub fn train_gradient(
    oracle: &dyn FidelityOracle,
    n_qubits: usize,
    repr: Representation,
    config: &GradientConfig,
    validator: Option<&Validator<'_>>,
) -> Result<ReconstructionReport> {
    if config.epochs == 0 || !(config.fd_epsilon > 0.0) || !(config.lr > 0.0) || config.latent_dim == 0 {
        return invalid("gradient config needs epochs ≥ 1 and positive lr, fd_epsilon, latent_dim");
    }
    let raw_len = repr.raw_len(n_qubits)?;
    let start = Instant::now();
    let mut rng = Rng::new(config.seed);
    let mut widths = vec![config.latent_dim];
    widths.extend(&config.hidden);
    widths.push(raw_len);
    let mut net = GeneratorNetwork::new(&widths, &mut rng);
    let mut adam = AdamState::new(net.params().len(), config.lr);

    let mut trace = Vec::with_capacity(config.epochs);
    let mut validation = Vec::new();
    let mut evals = 0u64;
    let mut best: Option<(f64, Vec<f64>, Reconstruction)> = None;
    for _ in 0..config.epochs {
        let z: Vec<f64> = (0..config.latent_dim).map(|_| rng.uniform()).collect();
        let (raw, cache) = net.forward(&z);
        let (recon, candidate) = decode_for_oracle(repr, &raw)?;
        let f = oracle.evaluate(&candidate)?;
        let grad = loss_gradient(oracle, repr, &raw, config.fd_epsilon)?;
        evals += 1 + 2 * raw_len as u64;
        trace.push(f);
        if let Some(v) = validator {
            validation.push(v(&recon));
        }
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, raw.clone(), recon));
        }
        if f >= config.threshold {
            break;
        }
        let scaled: Vec<f64> = grad.iter().map(|g| g * config.scaling_factor).collect();
        let param_grads = net.backward(&cache, &scaled);
        adam.step(net.params_mut(), &param_grads);
    }
    let (best_fidelity, best_raw, candidate) = best.expect("at least one epoch ran");
    Ok(ReconstructionReport {
        method: Method::Gradient,
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
