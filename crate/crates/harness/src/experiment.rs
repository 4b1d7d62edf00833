//! Experiment specifications and the oracle/engine wiring they imply.

use std::path::PathBuf;

use qsnap_core::circuit::QuantumCircuit;
use qsnap_core::estimators::{EngineConfig, GradientConfig, Method, OracleMode, QeswapConfig, Representation, SwapTestOracle};
use qsnap_core::noise::{device_noise_model, NoiseParams};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Thresholds every cohort reports in addition to any custom ones.
pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.95, 0.99];
/// Trajectories per noisy oracle evaluation unless overridden.
pub const DEFAULT_TRAJECTORIES: u64 = 2000;
/// Default cohort size.
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseSetting {
    Off,
    On { params: NoiseParams, trajectories: u64 },
}

impl NoiseSetting {
    pub fn device() -> Self {
        NoiseSetting::On { params: NoiseParams::default(), trajectories: DEFAULT_TRAJECTORIES }
    }

    pub fn is_on(&self) -> bool {
        matches!(self, NoiseSetting::On { .. })
    }

    /// Early-stop threshold for this regime: 0.99 with noise, 0.999 without.
    pub fn default_stop(&self) -> f64 {
        if self.is_on() {
            0.99
        } else {
            0.999
        }
    }
}

/// Largest register a noisy cohort accepts for `method`.
pub fn noisy_qubit_limit(method: Method) -> usize {
    match method {
        Method::Gradient => 2,
        Method::Qeswap => 3,
    }
}

/// How the SWAP-test oracle reports its value.
///
/// `None` shots means the exact expectation; with noise on, the trajectory
/// average is used and shots must be `None`.
pub fn oracle_mode(noise: &NoiseSetting, shots: Option<u64>) -> Result<OracleMode> {
    match (noise, shots) {
        (NoiseSetting::Off, None) => Ok(OracleMode::Analytic),
        (NoiseSetting::Off, Some(s)) => Ok(OracleMode::Shots(s)),
        (NoiseSetting::On { params, trajectories }, None) => {
            params.validate()?;
            Ok(OracleMode::Noisy { model: device_noise_model(params)?, trajectories: *trajectories })
        }
        (NoiseSetting::On { .. }, Some(_)) => invalid("shot sampling cannot be combined with trajectory noise"),
    }
}

/// SWAP-test oracle against a single target preparation.
pub fn build_oracle(prep: QuantumCircuit, noise: &NoiseSetting, shots: Option<u64>, seed: u64) -> Result<SwapTestOracle> {
    Ok(SwapTestOracle::new(prep, oracle_mode(noise, shots)?, seed)?)
}

/// Default engine configuration for `method`.
pub fn default_engine(method: Method) -> EngineConfig {
    match method {
        Method::Gradient => EngineConfig::Gradient(GradientConfig::default()),
        Method::Qeswap => EngineConfig::Qeswap(QeswapConfig::default()),
    }
}

/// Copy of `engine` with its seed replaced.
pub fn with_seed(engine: &EngineConfig, seed: u64) -> EngineConfig {
    let mut out = engine.clone();
    match &mut out {
        EngineConfig::Gradient(c) => c.seed = seed,
        EngineConfig::Qeswap(c) => c.seed = seed,
    }
    out
}

/// Copy of `engine` with its iteration budget replaced.
pub fn with_budget(engine: &EngineConfig, budget: usize) -> EngineConfig {
    let mut out = engine.clone();
    match &mut out {
        EngineConfig::Gradient(c) => c.epochs = budget,
        EngineConfig::Qeswap(c) => c.max_iter = budget,
    }
    out
}

/// Copy of `engine` with its early-stop threshold replaced.
pub fn with_stop(engine: &EngineConfig, threshold: f64) -> EngineConfig {
    let mut out = engine.clone();
    match &mut out {
        EngineConfig::Gradient(c) => c.threshold = threshold,
        EngineConfig::Qeswap(c) => c.threshold = threshold,
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub engine: EngineConfig,
    pub representation: Representation,
    pub n_qubits: usize,
    pub n_trials: usize,
    pub noise: NoiseSetting,
    /// `None` for the exact oracle.
    pub shots: Option<u64>,
    /// Sorted, deduplicated; always contains [`DEFAULT_THRESHOLDS`].
    pub thresholds: Vec<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(method: Method, representation: Representation, n_qubits: usize) -> Self {
        Self {
            engine: default_engine(method),
            representation,
            n_qubits,
            n_trials: DEFAULT_TRIALS,
            noise: NoiseSetting::Off,
            shots: None,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            seed: 0,
            out_dir: None,
        }
    }

    pub fn method(&self) -> Method {
        self.engine.method()
    }

    /// Sets the noise regime and the matching early-stop threshold.
    pub fn with_noise(mut self, noise: NoiseSetting) -> Self {
        self.engine = with_stop(&self.engine, noise.default_stop());
        self.noise = noise;
        self
    }

    /// Adds custom thresholds, keeping the list sorted and unique.
    pub fn add_thresholds(&mut self, extra: &[f64]) {
        self.thresholds.extend_from_slice(extra);
        self.thresholds.sort_by(f64::total_cmp);
        self.thresholds.dedup();
    }

    /// True when the oracle value is itself the fidelity, so the oracle trace
    /// can be judged directly. Otherwise trials are judged on the exact
    /// fidelity recorded alongside.
    pub fn oracle_is_exact(&self) -> bool {
        !self.noise.is_on() && self.shots.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return invalid("n_trials must be at least 1");
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return invalid("thresholds must lie in (0, 1]");
        }
        self.representation.raw_len(self.n_qubits)?;
        if self.shots == Some(0) {
            return invalid("shot count must be at least 1");
        }
        if let NoiseSetting::On { params, trajectories } = &self.noise {
            if *trajectories == 0 {
                return invalid("trajectories must be at least 1");
            }
            params.validate()?;
            let limit = noisy_qubit_limit(self.method());
            if self.n_qubits > limit {
                return invalid(format!("noisy {} cohorts support at most {limit} qubits", self.method()));
            }
            if self.shots.is_some() {
                return invalid("shot sampling cannot be combined with trajectory noise");
            }
        }
        Ok(())
    }
}
