use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Gate kinds. `H`, `RY` and `CSWAP` are convenience kinds that
/// [`super::lower_to_basis`] expands into the native set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Sx,
    Rz,
    Cx,
    H,
    Ry,
    Cswap,
    Measure,
    Reset,
    Id,
    Delay,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::X,
        GateKind::Sx,
        GateKind::Rz,
        GateKind::Cx,
        GateKind::H,
        GateKind::Ry,
        GateKind::Cswap,
        GateKind::Measure,
        GateKind::Reset,
        GateKind::Id,
        GateKind::Delay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Sx => "SX",
            GateKind::Rz => "RZ",
            GateKind::Cx => "CX",
            GateKind::H => "H",
            GateKind::Ry => "RY",
            GateKind::Cswap => "CSWAP",
            GateKind::Measure => "MEASURE",
            GateKind::Reset => "RESET",
            GateKind::Id => "ID",
            GateKind::Delay => "DELAY",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx => 2,
            GateKind::Cswap => 3,
            _ => 1,
        }
    }

    /// Member of the native basis `{cx, delay, id, measure, reset, rz, sx, x}`.
    pub fn is_basis(self) -> bool {
        !matches!(self, GateKind::H | GateKind::Ry | GateKind::Cswap)
    }
}

/// A gate with its operands. Angles are radians, delays nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    Sx(usize),
    Rz(usize, f64),
    Cx { control: usize, target: usize },
    H(usize),
    Ry(usize, f64),
    Cswap { control: usize, a: usize, b: usize },
    Measure(usize),
    Reset(usize),
    Id(usize),
    Delay(usize, f64),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) => GateKind::X,
            Gate::Sx(_) => GateKind::Sx,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cx { .. } => GateKind::Cx,
            Gate::H(_) => GateKind::H,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Cswap { .. } => GateKind::Cswap,
            Gate::Measure(_) => GateKind::Measure,
            Gate::Reset(_) => GateKind::Reset,
            Gate::Id(_) => GateKind::Id,
            Gate::Delay(..) => GateKind::Delay,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q)
            | Gate::Sx(q)
            | Gate::Rz(q, _)
            | Gate::H(q)
            | Gate::Ry(q, _)
            | Gate::Measure(q)
            | Gate::Reset(q)
            | Gate::Id(q)
            | Gate::Delay(q, _) => vec![q],
            Gate::Cx { control, target } => vec![control, target],
            Gate::Cswap { control, a, b } => vec![control, a, b],
        }
    }

    /// Rotation angle or delay duration, if the kind carries one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            Gate::Rz(_, t) | Gate::Ry(_, t) | Gate::Delay(_, t) => Some(t),
            _ => None,
        }
    }

    /// Same gate with every operand passed through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::X(q) => Gate::X(f(q)),
            Gate::Sx(q) => Gate::Sx(f(q)),
            Gate::Rz(q, t) => Gate::Rz(f(q), t),
            Gate::Cx { control, target } => Gate::Cx {
                control: f(control),
                target: f(target),
            },
            Gate::H(q) => Gate::H(f(q)),
            Gate::Ry(q, t) => Gate::Ry(f(q), t),
            Gate::Cswap { control, a, b } => Gate::Cswap {
                control: f(control),
                a: f(a),
                b: f(b),
            },
            Gate::Measure(q) => Gate::Measure(f(q)),
            Gate::Reset(q) => Gate::Reset(f(q)),
            Gate::Id(q) => Gate::Id(f(q)),
            Gate::Delay(q, t) => Gate::Delay(f(q), t),
        }
    }

    fn from_parts(kind: GateKind, qubits: &[usize], param: Option<f64>) -> Result<Gate> {
        if qubits.len() != kind.arity() {
            return invalid(format!(
                "{} takes {} qubit(s), got {}",
                kind.name(),
                kind.arity(),
                qubits.len()
            ));
        }
        let needs_param = matches!(kind, GateKind::Rz | GateKind::Ry | GateKind::Delay);
        if needs_param != param.is_some() {
            return invalid(format!("{} parameter mismatch", kind.name()));
        }
        let p = param.unwrap_or(0.0);
        let q = qubits[0];
        Ok(match kind {
            GateKind::X => Gate::X(q),
            GateKind::Sx => Gate::Sx(q),
            GateKind::Rz => Gate::Rz(q, p),
            GateKind::Cx => Gate::Cx {
                control: q,
                target: qubits[1],
            },
            GateKind::H => Gate::H(q),
            GateKind::Ry => Gate::Ry(q, p),
            GateKind::Cswap => Gate::Cswap {
                control: q,
                a: qubits[1],
                b: qubits[2],
            },
            GateKind::Measure => Gate::Measure(q),
            GateKind::Reset => Gate::Reset(q),
            GateKind::Id => Gate::Id(q),
            GateKind::Delay => Gate::Delay(q, p),
        })
    }
}

/// `KIND q0[,q1[,q2]][ (theta=<17 significant digits>)]`; delays print
/// their duration in nanoseconds as `(duration=...)`.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qubits = self
            .qubits()
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "{} {}", self.kind().name(), qubits)?;
        match *self {
            Gate::Rz(_, t) | Gate::Ry(_, t) => write!(f, " (theta={t:.16e})"),
            Gate::Delay(_, d) => write!(f, " (duration={d:.16e})"),
            _ => Ok(()),
        }
    }
}

/// Ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measured: BTreeSet<usize>,
}

impl QuantumCircuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("a circuit needs at least one qubit");
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            measured: BTreeSet::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Qubits with a MEASURE not yet cleared by a RESET.
    pub fn measured(&self) -> &BTreeSet<usize> {
        &self.measured
    }

    pub fn has_measurement(&self) -> bool {
        self.gates.iter().any(|g| g.kind() == GateKind::Measure)
    }

    /// Appends `gate` after validating operands and measurement ordering.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let qubits = gate.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return invalid(format!(
                    "{}: qubit {q} out of range for width {}",
                    gate.kind().name(),
                    self.n_qubits
                ));
            }
            if qubits[..i].contains(&q) {
                return invalid(format!("{}: repeated operand {q}", gate.kind().name()));
            }
        }
        if let Some(t) = gate.parameter() {
            if !t.is_finite() || (gate.kind() == GateKind::Delay && t < 0.0) {
                return invalid(format!("{}: bad parameter {t}", gate.kind().name()));
            }
        }
        match gate.kind() {
            GateKind::Reset => {
                self.measured.remove(&qubits[0]);
            }
            GateKind::Measure => {
                if !self.measured.insert(qubits[0]) {
                    return invalid(format!("qubit {} measured twice", qubits[0]));
                }
            }
            _ => {
                if let Some(q) = qubits.iter().find(|q| self.measured.contains(q)) {
                    return invalid(format!(
                        "{} acts on qubit {q} after its measurement",
                        gate.kind().name()
                    ));
                }
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    /// Appends every gate of `other` with qubit `q` moved to `q + offset`.
    pub fn append_shifted(&mut self, other: &QuantumCircuit, offset: usize) -> Result<&mut Self> {
        if other.n_qubits + offset > self.n_qubits {
            return invalid(format!(
                "cannot place a {}-qubit circuit at offset {offset} in width {}",
                other.n_qubits, self.n_qubits
            ));
        }
        self.extend(other.gates.iter().map(|g| g.remap(|q| q + offset)))
    }

    /// Circuit made of the first `cut` gates.
    pub fn prefix(&self, cut: usize) -> Result<QuantumCircuit> {
        if cut > self.gates.len() {
            return invalid(format!(
                "cut index {cut} beyond circuit length {}",
                self.gates.len()
            ));
        }
        let mut out = QuantumCircuit::new(self.n_qubits)?;
        out.extend(self.gates[..cut].iter().copied())?;
        Ok(out)
    }

    /// Deterministic one-gate-per-line text form.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the [`dump`](Self::dump) format. Blank lines and `#` comments are skipped.
    pub fn parse(n_qubits: usize, text: &str) -> Result<QuantumCircuit> {
        let mut circuit = QuantumCircuit::new(n_qubits)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| {
                crate::Error::InvalidArgument(format!("line {}: {what}: {raw:?}", lineno + 1))
            };
            let (head, param) = match line.find(" (") {
                Some(i) => {
                    let rest = line[i + 2..].strip_suffix(')').ok_or_else(|| bad("unclosed parameter"))?;
                    let (key, value) = rest.split_once('=').ok_or_else(|| bad("malformed parameter"))?;
                    if key != "theta" && key != "duration" {
                        return Err(bad("unknown parameter key"));
                    }
                    let value: f64 = value.parse().map_err(|_| bad("bad number"))?;
                    (&line[..i], Some(value))
                }
                None => (line, None),
            };
            let (kind, operands) = head.split_once(' ').ok_or_else(|| bad("missing operands"))?;
            let kind = GateKind::from_name(kind).ok_or_else(|| bad("unknown gate kind"))?;
            let qubits = operands
                .split(',')
                .map(|q| q.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("bad qubit index"))?;
            circuit.push(Gate::from_parts(kind, &qubits, param)?)?;
        }
        Ok(circuit)
    }
}
