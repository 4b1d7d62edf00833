//! Catalog of named benchmark states.

use std::f64::consts::FRAC_1_SQRT_2;

use csv::StringRecord;
use qsnap_core::circuit::{mottonen_prepare, Gate, QuantumCircuit};
use qsnap_core::state::StateVector;
use qsnap_core::Complex64 as C;
use qsnap_core::Rng;
use rayon::prelude::*;

use crate::emit::{fmt_opt, parse_field, parse_opt, CsvRow};
use crate::error::Result;
use crate::experiment::with_seed;
use crate::runs::{reconstruct_known, RunSettings};

/// Fidelity at which the benchmark counts a state as reconstructed.
pub const STANDARD_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct StandardState {
    pub name: String,
    /// Row group: `zero_one`, `plus_minus`, `basis2`, `bell` or `ghz3`.
    pub family: &'static str,
    pub vector: StateVector,
}

fn from_pairs(n: usize, terms: &[(usize, f64)]) -> StateVector {
    let mut amps = vec![C::new(0.0, 0.0); 1 << n];
    for &(k, a) in terms {
        amps[k] = C::new(a, 0.0);
    }
    StateVector::from_amplitudes(amps).expect("catalog states are nonzero")
}

fn state(name: impl Into<String>, family: &'static str, vector: StateVector) -> StandardState {
    StandardState { name: name.into(), family, vector }
}

/// Every catalog state on `n_qubits` qubits (1, 2 or 3); empty otherwise.
///
/// Basis labels list qubit `n−1` first, so `b01` has qubit 0 set. The GHZ
/// family is `(|0 b(k)⟩ ± |1 b̄(k)⟩)/√2` for the 2-bit pattern `b(k)`, i.e.
/// basis indices `k` and `7 − k`.
pub fn catalog(n_qubits: usize) -> Vec<StandardState> {
    let h = FRAC_1_SQRT_2;
    match n_qubits {
        1 => vec![
            state("zero", "zero_one", from_pairs(1, &[(0, 1.0)])),
            state("one", "zero_one", from_pairs(1, &[(1, 1.0)])),
            state("plus", "plus_minus", from_pairs(1, &[(0, h), (1, h)])),
            state("minus", "plus_minus", from_pairs(1, &[(0, h), (1, -h)])),
        ],
        2 => {
            let mut out: Vec<StandardState> = (0..4)
                .map(|k| state(format!("b{:02b}", k), "basis2", from_pairs(2, &[(k, 1.0)])))
                .collect();
            out.push(state("phi+", "bell", from_pairs(2, &[(0, h), (3, h)])));
            out.push(state("phi-", "bell", from_pairs(2, &[(0, h), (3, -h)])));
            out.push(state("psi+", "bell", from_pairs(2, &[(1, h), (2, h)])));
            out.push(state("psi-", "bell", from_pairs(2, &[(1, h), (2, -h)])));
            out
        }
        3 => (0..4)
            .flat_map(|k| {
                [("+", h), ("-", -h)].map(|(sign, s)| {
                    state(format!("ghz{k}{sign}"), "ghz3", from_pairs(3, &[(k, h), (7 - k, s)]))
                })
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// The full catalog for one, two and three qubits.
pub fn all_standard_states() -> Vec<StandardState> {
    (1..=3).flat_map(catalog).collect()
}

/// Looks a state up by its catalog name.
pub fn by_name(name: &str) -> Option<StandardState> {
    all_standard_states().into_iter().find(|s| s.name == name)
}

/// `H(0)` followed by a CX chain: prepares `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_circuit(n_qubits: usize) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(n_qubits).expect("n ≥ 1");
    c.push(Gate::H(0)).expect("in range");
    for q in 1..n_qubits {
        c.push(Gate::Cx { control: q - 1, target: q }).expect("in range");
    }
    c
}

/// One benchmark row. `epochs` is the first epoch at or above
/// [`STANDARD_THRESHOLD`] and `fidelity` the best judged value; both are NA
/// when the run failed, and `epochs` is NA when the threshold was missed.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardRow {
    pub state: String,
    pub family: String,
    pub n_qubits: usize,
    pub epochs: Option<usize>,
    pub fidelity: Option<f64>,
    pub error: Option<String>,
}

impl CsvRow for StandardRow {
    const HEADER: &'static [&'static str] = &["state", "family", "n_qubits", "epochs", "fidelity", "error"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.state.clone(),
            self.family.clone(),
            self.n_qubits.to_string(),
            fmt_opt(&self.epochs),
            fmt_opt(&self.fidelity),
            fmt_opt(&self.error),
        ]
    }

    fn from_fields(f: &StringRecord) -> Result<Self> {
        Ok(Self {
            state: parse_field(f, 0, "state")?,
            family: parse_field(f, 1, "family")?,
            n_qubits: parse_field(f, 2, "n_qubits")?,
            epochs: parse_opt(f, 3, "epochs")?,
            fidelity: parse_opt(f, 4, "fidelity")?,
            error: parse_opt(f, 5, "error")?,
        })
    }
}

fn run_one(state: &StandardState, settings: &RunSettings, mut rng: Rng) -> StandardRow {
    let oracle_seed = rng.next_u64();
    let settings = RunSettings { engine: with_seed(&settings.engine, rng.next_u64()), ..settings.clone() };
    let outcome = mottonen_prepare(&state.vector).map_err(Into::into).and_then(|p| reconstruct_known(&p, &settings, oracle_seed));
    let mut row = StandardRow {
        state: state.name.clone(),
        family: state.family.to_owned(),
        n_qubits: state.vector.n_qubits(),
        epochs: None,
        fidelity: None,
        error: None,
    };
    match outcome {
        Ok(run) => {
            row.epochs = run.epochs_to(STANDARD_THRESHOLD);
            row.fidelity = run.best();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Reconstructs every catalog state on the given qubit counts, in catalog
/// order. Failures become NA rows.
pub fn run_standard_states(settings: &RunSettings, qubits: &[usize], seed: u64) -> Vec<StandardRow> {
    let states: Vec<StandardState> = qubits.iter().flat_map(|&n| catalog(n)).collect();
    let root = Rng::new(seed);
    states.par_iter().enumerate().map(|(i, s)| run_one(s, settings, root.split(i as u64))).collect()
}
