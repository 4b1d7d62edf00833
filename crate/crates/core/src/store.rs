//! Content-addressed persistence of reconstructed pure states.
//!
//! Each record is a binary body `<id>.qsnap` (magic, little-endian `u32`
//! qubit count, interleaved little-endian `f64` amplitudes) plus a sidecar
//! `<id>.json` with metadata. The identifier is the lowercase hex SHA-256
//! of the body. `index.jsonl` logs one line per newly stored record.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{mottonen_prepare, QuantumCircuit};
use crate::error::{invalid, Error, Result};
use crate::state::StateVector;

pub const MAGIC: [u8; 8] = *b"QSNAP\0\0\x01";
pub const FORMAT_VERSION: u32 = 1;
const NORM_TOLERANCE: f64 = 1e-9;
const INDEX_FILE: &str = "index.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetadata {
    pub method: String,
    pub representation: String,
    pub best_fidelity: f64,
    pub epochs: usize,
    /// RFC 3339 UTC timestamp.
    pub created_at: String,
    pub seed: u64,
    pub label: String,
}

impl SnapshotMetadata {
    /// Metadata stamped with the current UTC time.
    pub fn now(method: &str, representation: &str, best_fidelity: f64, epochs: usize, seed: u64, label: &str) -> Self {
        Self {
            method: method.to_owned(),
            representation: representation.to_owned(),
            best_fidelity,
            epochs,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            seed,
            label: label.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub format_version: u32,
    pub n_qubits: usize,
    /// Interleaved `[re0, im0, re1, im1, ...]`.
    pub amplitudes: Vec<f64>,
    pub metadata: SnapshotMetadata,
}

/// Sidecar document: everything except the amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    format_version: u32,
    n_qubits: usize,
    metadata: SnapshotMetadata,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexLine {
    id: String,
    n_qubits: usize,
    label: String,
    created_at: String,
}

impl SnapshotRecord {
    pub fn from_state(state: &StateVector, metadata: SnapshotMetadata) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            n_qubits: state.n_qubits(),
            amplitudes: state.to_interleaved(),
            metadata,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return invalid(format!("unsupported format version {}", self.format_version));
        }
        if self.n_qubits == 0 || self.n_qubits > 30 || self.amplitudes.len() != 2usize << self.n_qubits {
            return invalid(format!(
                "{} amplitude values do not match {} qubits",
                self.amplitudes.len(),
                self.n_qubits
            ));
        }
        if self.amplitudes.iter().any(|v| !v.is_finite()) {
            return invalid("amplitudes must be finite");
        }
        let norm: f64 = self.amplitudes.iter().map(|v| v * v).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return invalid(format!("amplitude vector has squared norm {norm}, expected 1"));
        }
        Ok(())
    }

    /// The canonical binary body the identifier is computed over.
    pub fn body(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.amplitudes.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&(self.n_qubits as u32).to_le_bytes());
        for v in &self.amplitudes {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn identifier(&self) -> String {
        hex::encode(Sha256::digest(self.body()))
    }

    /// Amplitudes as a state vector without renormalizing.
    pub fn state(&self) -> Result<StateVector> {
        let amps = self
            .amplitudes
            .chunks_exact(2)
            .map(|p| crate::Complex64::new(p[0], p[1]))
            .collect();
        StateVector::from_normalized(amps, NORM_TOLERANCE)
    }
}

fn parse_body(body: &[u8]) -> Result<(usize, Vec<f64>)> {
    if body.len() < 12 || body[..8] != MAGIC {
        return Err(Error::Integrity("bad magic".into()));
    }
    let n = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes")) as usize;
    let values = &body[12..];
    if n == 0 || n > 30 || values.len() != 8 * (2usize << n) {
        return Err(Error::Integrity(format!("body length does not match {n} qubits")));
    }
    let amps = values
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((n, amps))
}

fn is_identifier(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

/// Stores `record` under `store`, returning its identifier. Storing the same
/// body again returns the same identifier and leaves the store unchanged.
pub fn deposit(record: &SnapshotRecord, store: &Path) -> Result<String> {
    record.validate()?;
    fs::create_dir_all(store)?;
    let body = record.body();
    let id = hex::encode(Sha256::digest(&body));
    let body_path = store.join(format!("{id}.qsnap"));
    if body_path.exists() {
        return Ok(id);
    }
    let sidecar = Sidecar {
        format_version: record.format_version,
        n_qubits: record.n_qubits,
        metadata: record.metadata.clone(),
    };
    write_atomic(store, &format!("{id}.json"), serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
    write_atomic(store, &format!("{id}.qsnap"), &body)?;
    let line = serde_json::to_string(&IndexLine {
        id: id.clone(),
        n_qubits: record.n_qubits,
        label: record.metadata.label.clone(),
        created_at: record.metadata.created_at.clone(),
    })?;
    let mut index = OpenOptions::new().create(true).append(true).open(store.join(INDEX_FILE))?;
    writeln!(index, "{line}")?;
    Ok(id)
}

/// Loads and verifies the record stored under `id`.
pub fn read_record(id: &str, store: &Path) -> Result<SnapshotRecord> {
    if !is_identifier(id) {
        return Err(Error::NotFound(id.to_owned()));
    }
    let body = match fs::read(store.join(format!("{id}.qsnap"))) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::NotFound(id.to_owned())),
        Err(e) => return Err(e.into()),
    };
    let actual = hex::encode(Sha256::digest(&body));
    if actual != id {
        return Err(Error::Integrity(format!("body hash {actual} does not match {id}")));
    }
    let (n_qubits, amplitudes) = parse_body(&body)?;
    let sidecar: Sidecar = serde_json::from_slice(&fs::read(store.join(format!("{id}.json")))?)?;
    if sidecar.n_qubits != n_qubits || sidecar.format_version != FORMAT_VERSION {
        return Err(Error::Integrity("sidecar does not match body".into()));
    }
    let record = SnapshotRecord {
        format_version: sidecar.format_version,
        n_qubits,
        amplitudes,
        metadata: sidecar.metadata,
    };
    record.validate().map_err(|e| Error::Integrity(e.to_string()))?;
    Ok(record)
}

/// The stored state and a circuit preparing it from `|0…0⟩`.
pub fn withdraw(id: &str, store: &Path) -> Result<(StateVector, QuantumCircuit)> {
    let state = read_record(id, store)?.state()?;
    let circuit = mottonen_prepare(&state)?;
    Ok((state, circuit))
}

/// Identifiers of all stored bodies, sorted.
pub fn list(store: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    let entries = match fs::read_dir(store) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(ids),
        Err(e) => return Err(e.into()),
    };
    for entry in entries {
        let name = entry?.file_name();
        if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".qsnap")) {
            if is_identifier(id) {
                ids.push(id.to_owned());
            }
        }
    }
    ids.sort();
    Ok(ids)
}
