use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;
use crate::error::{invalid, Result};

use super::channel::{
    bit_flip_channel, depolarizing_channel, thermal_relaxation_channel, KrausChannel,
};

/// Calibration record for the gate-level noise model.
///
/// `t1`, `t2` in microseconds; `readout_len`, `gate_len_1q`, `gate_len_2q` in
/// nanoseconds. The gate lengths are not part of the calibration table and
/// are configurable stand-ins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub bit_flip_p: f64,
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub t1: f64,
    pub t2: f64,
    pub readout_len: f64,
    pub gate_len_1q: f64,
    pub gate_len_2q: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            bit_flip_p: 2.003e-4,
            depol_1q: 1.701e-2,
            depol_2q: 0.02,
            t1: 272.21,
            t2: 188.1,
            readout_len: 1216.0,
            gate_len_1q: 60.0,
            gate_len_2q: 660.0,
        }
    }
}

impl NoiseParams {
    /// All-zero probabilities and durations: every channel is the identity.
    pub fn noiseless() -> Self {
        Self {
            bit_flip_p: 0.0,
            depol_1q: 0.0,
            depol_2q: 0.0,
            readout_len: 0.0,
            gate_len_1q: 0.0,
            gate_len_2q: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("bit_flip_p", self.bit_flip_p),
            ("depol_1q", self.depol_1q),
            ("depol_2q", self.depol_2q),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("{name} = {p} is not a probability"));
            }
        }
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return invalid("t1 and t2 must be positive");
        }
        if self.t2 > 2.0 * self.t1 {
            return invalid(format!("t2 = {} exceeds 2*t1 = {}", self.t2, 2.0 * self.t1));
        }
        for (name, d) in [
            ("readout_len", self.readout_len),
            ("gate_len_1q", self.gate_len_1q),
            ("gate_len_2q", self.gate_len_2q),
        ] {
            if !(d >= 0.0) || !d.is_finite() {
                return invalid(format!("{name} = {d} must be a non-negative duration"));
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines (`#` comments allowed). Keys are the field
    /// names; missing keys keep their defaults, unknown keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return invalid(format!("line {}: expected key=value", lineno + 1));
            };
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                crate::Error::InvalidArgument(format!("line {}: bad number for {key}", lineno + 1))
            })?;
            let slot = match key {
                "bit_flip_p" => &mut p.bit_flip_p,
                "depol_1q" => &mut p.depol_1q,
                "depol_2q" => &mut p.depol_2q,
                "t1" => &mut p.t1,
                "t2" => &mut p.t2,
                "readout_len" => &mut p.readout_len,
                "gate_len_1q" => &mut p.gate_len_1q,
                "gate_len_2q" => &mut p.gate_len_2q,
                other => return invalid(format!("line {}: unknown key {other:?}", lineno + 1)),
            };
            *slot = value;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "bit_flip_p={}\ndepol_1q={}\ndepol_2q={}\nt1={}\nt2={}\nreadout_len={}\ngate_len_1q={}\ngate_len_2q={}\n",
            self.bit_flip_p,
            self.depol_1q,
            self.depol_2q,
            self.t1,
            self.t2,
            self.readout_len,
            self.gate_len_1q,
            self.gate_len_2q
        )
    }
}

/// Where a channel attached to a gate acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// On all operands jointly; channel arity equals gate arity.
    Joint,
    /// A single-qubit channel on each operand in turn.
    EachOperand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub channel: KrausChannel,
    pub placement: Placement,
}

/// Gate-kind → channel sequence applied after the ideal gate.
#[derive(Debug, Clone, Default)]
pub struct NoiseModel {
    channels: BTreeMap<GateKind, Vec<Assignment>>,
    /// Per-(control, target) overrides for CX; empty unless populated by the caller.
    cx_pairs: BTreeMap<(usize, usize), Vec<Assignment>>,
    measurement: Option<KrausChannel>,
    /// `(t1, t2)` for relaxation over DELAY durations.
    delay_relaxation: Option<(f64, f64)>,
}

fn check_assignment(kind: GateKind, a: &Assignment) -> Result<()> {
    let ok = match a.placement {
        Placement::Joint => a.channel.arity() == kind.arity(),
        Placement::EachOperand => a.channel.arity() == 1,
    };
    if !ok {
        return invalid(format!(
            "{}-qubit channel cannot be attached to {} as {:?}",
            a.channel.arity(),
            kind.name(),
            a.placement
        ));
    }
    Ok(())
}

impl NoiseModel {
    /// No noise anywhere.
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn add(&mut self, kind: GateKind, channel: KrausChannel, placement: Placement) -> Result<&mut Self> {
        let a = Assignment { channel, placement };
        check_assignment(kind, &a)?;
        if kind == GateKind::Measure {
            return invalid("use set_measurement for readout relaxation");
        }
        self.channels.entry(kind).or_default().push(a);
        Ok(self)
    }

    /// Replaces the CX channels for one ordered operand pair.
    pub fn set_cx_pair(&mut self, control: usize, target: usize, assignments: Vec<Assignment>) -> Result<&mut Self> {
        for a in &assignments {
            check_assignment(GateKind::Cx, a)?;
        }
        self.cx_pairs.insert((control, target), assignments);
        Ok(self)
    }

    pub fn set_measurement(&mut self, channel: KrausChannel) -> Result<&mut Self> {
        if channel.arity() != 1 {
            return invalid("measurement relaxation must be a single-qubit channel");
        }
        self.measurement = Some(channel);
        Ok(self)
    }

    pub fn set_delay_relaxation(&mut self, t1_us: f64, t2_us: f64) -> Result<&mut Self> {
        thermal_relaxation_channel(t1_us, t2_us, 0.0)?;
        self.delay_relaxation = Some((t1_us, t2_us));
        Ok(self)
    }

    pub fn assignments(&self, kind: GateKind) -> &[Assignment] {
        self.channels.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Channels for a CX on `(control, target)`, honoring pair overrides.
    pub fn cx_assignments(&self, control: usize, target: usize) -> &[Assignment] {
        self.cx_pairs
            .get(&(control, target))
            .map(Vec::as_slice)
            .unwrap_or_else(|| self.assignments(GateKind::Cx))
    }

    pub fn measurement(&self) -> Option<&KrausChannel> {
        self.measurement.as_ref()
    }

    /// Relaxation channel for a DELAY of `duration_ns`, if delays are noisy.
    pub fn delay_channel(&self, duration_ns: f64) -> Result<Option<KrausChannel>> {
        self.delay_relaxation
            .map(|(t1, t2)| thermal_relaxation_channel(t1, t2, duration_ns))
            .transpose()
    }

    pub fn is_ideal(&self) -> bool {
        self.channels.values().flatten().all(|a| a.channel.is_identity())
            && self.cx_pairs.values().flatten().all(|a| a.channel.is_identity())
            && self.measurement.as_ref().is_none_or(KrausChannel::is_identity)
            && self.delay_relaxation.is_none()
    }
}

/// The calibrated model: depolarizing + bit flip on RZ/SX/X, two-qubit
/// depolarizing + per-operand relaxation on CX, relaxation over the readout
/// window before MEASURE, and relaxation on ID/DELAY.
pub fn device_noise_model(params: &NoiseParams) -> Result<NoiseModel> {
    params.validate()?;
    let mut model = NoiseModel::ideal();
    for kind in [GateKind::Rz, GateKind::Sx, GateKind::X] {
        model.add(kind, depolarizing_channel(params.depol_1q, 1)?, Placement::Joint)?;
        model.add(kind, bit_flip_channel(params.bit_flip_p)?, Placement::Joint)?;
    }
    model.add(GateKind::Cx, depolarizing_channel(params.depol_2q, 2)?, Placement::Joint)?;
    model.add(
        GateKind::Cx,
        thermal_relaxation_channel(params.t1, params.t2, params.gate_len_2q)?,
        Placement::EachOperand,
    )?;
    model.set_measurement(thermal_relaxation_channel(params.t1, params.t2, params.readout_len)?)?;
    model.add(
        GateKind::Id,
        thermal_relaxation_channel(params.t1, params.t2, params.gate_len_1q)?,
        Placement::EachOperand,
    )?;
    model.set_delay_relaxation(params.t1, params.t2)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_structure() {
        let m = device_noise_model(&NoiseParams::default()).unwrap();
        assert!(m.assignments(GateKind::Cx).iter().any(|a| a.channel.len() == 16));
        assert_eq!(m.assignments(GateKind::Sx).len(), 2);
        assert_eq!(m.assignments(GateKind::Sx)[0].channel.len(), 4);
        assert!(m.measurement().is_some());
        assert!(m.assignments(GateKind::H).is_empty());
        assert!(!m.is_ideal());
    }

    #[test]
    fn noiseless_params_give_identity_channels() {
        let m = device_noise_model(&NoiseParams::noiseless()).unwrap();
        assert!(m.channels.values().flatten().all(|a| a.channel.is_identity()));
    }

    #[test]
    fn rejects_mismatched_arity() {
        let mut m = NoiseModel::ideal();
        let two = depolarizing_channel(0.1, 2).unwrap();
        assert!(m.add(GateKind::X, two.clone(), Placement::Joint).is_err());
        assert!(m.add(GateKind::Cx, two.clone(), Placement::EachOperand).is_err());
        assert!(m.add(GateKind::Cx, two, Placement::Joint).is_ok());
    }

    #[test]
    fn config_parsing() {
        let p = NoiseParams::parse("# calibration\ndepol_1q = 0.0017\nt2=100\n").unwrap();
        assert_eq!(p.depol_1q, 0.0017);
        assert_eq!(p.t2, 100.0);
        assert_eq!(p.t1, 272.21);
        assert!(NoiseParams::parse("colour=blue\n").is_err());
        assert!(NoiseParams::parse("depol_1q\n").is_err());
        assert!(NoiseParams::parse("depol_1q=2\n").is_err());
        let d = NoiseParams::default();
        assert_eq!(NoiseParams::parse(&d.to_config_string()).unwrap(), d);
    }

    #[test]
    fn t2_above_t1_is_unsupported() {
        let p = NoiseParams { t2: 300.0, ..NoiseParams::default() };
        assert!(matches!(
            device_noise_model(&p),
            Err(crate::Error::UnsupportedRegime(_))
        ));
    }
}
