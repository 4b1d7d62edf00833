//! Reconstruction engines driven only by a fidelity oracle: a generator
//! network trained through finite differences, and the QESwap evolution
//! strategy. Both work with state-vector, unitary and density decoders.

mod decode;
mod gradient;
mod network;
mod oracle;
mod qeswap;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use decode::{
    decode_candidate_density, decode_candidate_state, decode_candidate_unitary, decode_for_oracle,
    Reconstruction,
};
pub use gradient::{loss_gradient, train_gradient, GradientConfig};
pub use network::{AdamState, ForwardCache, GeneratorNetwork};
pub use oracle::{Candidate, FidelityOracle, OracleMode, SwapTestOracle};
pub use qeswap::{advantages, es_step, train_qeswap, QeswapConfig, MIN_SPREAD};
pub use report::ReconstructionReport;

/// Out-of-band fidelity check on a reconstruction (e.g. exact overlap with a
/// known target). Estimators only record its values; they never act on them.
pub type Validator<'a> = dyn Fn(&Reconstruction) -> f64 + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gradient,
    Qeswap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    StateVector,
    Unitary,
    Density,
}

impl Representation {
    /// Length of the raw real vector the engines optimize.
    pub fn raw_len(self, n_qubits: usize) -> Result<usize> {
        if n_qubits == 0 || n_qubits > 12 {
            return invalid(format!("unsupported qubit count {n_qubits}"));
        }
        let d = 1usize << n_qubits;
        Ok(match self {
            Representation::StateVector => 2 * d,
            Representation::Unitary | Representation::Density => 2 * d * d,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gradient => "gradient",
            Method::Qeswap => "qeswap",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Method::Gradient),
            "qeswap" => Ok(Method::Qeswap),
            other => invalid(format!("unknown method {other:?}")),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::StateVector => "statevector",
            Representation::Unitary => "unitary",
            Representation::Density => "density",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statevector" => Ok(Representation::StateVector),
            "unitary" => Ok(Representation::Unitary),
            "density" => Ok(Representation::Density),
            other => invalid(format!("unknown representation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EngineConfig {
    Gradient(GradientConfig),
    Qeswap(QeswapConfig),
}

impl EngineConfig {
    pub fn method(&self) -> Method {
        match self {
            EngineConfig::Gradient(_) => Method::Gradient,
            EngineConfig::Qeswap(_) => Method::Qeswap,
        }
    }
}

/// Runs the engine selected by `config` with the decoder for `repr`.
pub fn reconstruct(
    repr: Representation,
    oracle: &dyn FidelityOracle,
    n_qubits: usize,
    config: &EngineConfig,
    validator: Option<&Validator<'_>>,
) -> Result<ReconstructionReport> {
    match config {
        EngineConfig::Gradient(c) => train_gradient(oracle, n_qubits, repr, c, validator),
        EngineConfig::Qeswap(c) => train_qeswap(oracle, n_qubits, repr, c, validator),
    }
}
