//! Two-qubit network decompositions of `Lambda_n(not)` and the pulse
//! programs for the two physical realisations: the two-pulse modified CNOT
//! and the single transition-selective pi pulse.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::gates::{self, UnitaryGate};
use crate::pulse::{Event, Pulse, PulseProgram, Rotation, Shape};
use crate::spin_system::{ControlPattern, SpinSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    /// Controlled `sigma_x^t`; `t = 1/2` is controlled-sqrt(NOT).
    ControlledXPower(f64),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::ControlledXPower(_) => 2,
            _ => 1,
        }
    }

    pub fn unitary(self) -> UnitaryGate {
        use gates::Axis;
        match self {
            GateKind::X => gates::pauli_x(),
            GateKind::Rx(a) => gates::rotation(Axis::X, a),
            GateKind::Ry(a) => gates::rotation(Axis::Y, a),
            GateKind::Rz(a) => gates::rotation(Axis::Z, a),
            GateKind::Cnot => gates::lambda_not(1),
            GateKind::ControlledXPower(t) => gates::controlled(&gates::x_power(t)).expect("2x2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceGate {
    pub kind: GateKind,
    /// Control first for two-qubit gates.
    pub wires: Vec<usize>,
}

/// Ordered gates on an `n`-qubit register; the first gate acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    n_qubits: usize,
    gates: Vec<SequenceGate>,
}

impl GateSequence {
    pub fn new(n_qubits: usize) -> Self {
        GateSequence {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, kind: GateKind, wires: &[usize]) -> Result<()> {
        if wires.len() != kind.arity() {
            return Err(Error::InvalidWires(format!(
                "{kind:?} takes {} wires, got {}",
                kind.arity(),
                wires.len()
            )));
        }
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.n_qubits || wires[..i].contains(&w) {
                return Err(Error::InvalidWires(format!(
                    "{wires:?} on {} qubits",
                    self.n_qubits
                )));
            }
        }
        self.gates.push(SequenceGate {
            kind,
            wires: wires.to_vec(),
        });
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[SequenceGate] {
        &self.gates
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    pub fn one_qubit_count(&self) -> usize {
        self.gates.len() - self.two_qubit_count()
    }

    /// One gate per line: `kind wires=c,t [param=value]`, wires 1-based.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut seq: Option<GateSequence> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let mut tokens = line.split_whitespace();
            let kind = tokens.next().expect("non-empty");
            if kind == "qubits" {
                let n = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr("expected `qubits <n>`".into()))?;
                seq = Some(GateSequence::new(n));
                continue;
            }
            let seq = seq
                .as_mut()
                .ok_or_else(|| perr("missing `qubits <n>` header".into()))?;
            let mut wires = None;
            let mut param = None;
            for tok in tokens {
                match tok.split_once('=') {
                    Some(("wires", v)) => {
                        let parsed: std::result::Result<Vec<usize>, _> =
                            v.split(',').map(|w| w.parse::<usize>()).collect();
                        let parsed = parsed.map_err(|e| perr(format!("wires: {e}")))?;
                        if parsed.contains(&0) {
                            return Err(perr("wires are numbered from 1".into()));
                        }
                        wires = Some(parsed.into_iter().map(|w| w - 1).collect::<Vec<_>>());
                    }
                    Some(("angle_rad" | "exponent", v)) => {
                        param = Some(v.parse::<f64>().map_err(|e| perr(format!("`{v}`: {e}")))?);
                    }
                    _ => return Err(perr(format!("unexpected `{tok}`"))),
                }
            }
            let need =
                |p: Option<f64>| p.ok_or_else(|| perr(format!("`{kind}` needs a parameter")));
            let gk = match kind {
                "x" => GateKind::X,
                "rx" => GateKind::Rx(need(param)?),
                "ry" => GateKind::Ry(need(param)?),
                "rz" => GateKind::Rz(need(param)?),
                "cnot" => GateKind::Cnot,
                "cxpow" => GateKind::ControlledXPower(need(param)?),
                other => return Err(perr(format!("unknown gate `{other}`"))),
            };
            let wires = wires.ok_or_else(|| perr("missing wires".into()))?;
            seq.push(gk, &wires).map_err(|e| perr(e.to_string()))?;
        }
        seq.ok_or(Error::Parse {
            line: 0,
            msg: "empty sequence".into(),
        })
    }
}

impl fmt::Display for SequenceGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wires: Vec<String> = self.wires.iter().map(|w| (w + 1).to_string()).collect();
        let wires = wires.join(",");
        match self.kind {
            GateKind::X => write!(f, "x wires={wires}"),
            GateKind::Rx(a) => write!(f, "rx wires={wires} angle_rad={a}"),
            GateKind::Ry(a) => write!(f, "ry wires={wires} angle_rad={a}"),
            GateKind::Rz(a) => write!(f, "rz wires={wires} angle_rad={a}"),
            GateKind::Cnot => write!(f, "cnot wires={wires}"),
            GateKind::ControlledXPower(t) => write!(f, "cxpow wires={wires} exponent={t}"),
        }
    }
}

/// Product of the embedded gates, first gate applied first.
pub fn sequence_unitary(seq: &GateSequence) -> Result<UnitaryGate> {
    let n = seq.n_qubits();
    seq.gates()
        .iter()
        .try_fold(UnitaryGate::identity(n), |acc, g| {
            gates::embed(&g.kind.unitary(), &g.wires, n)?.after(&acc)
        })
}

/// Toffoli from five two-qubit gates:
/// `C-V(1->3) CNOT(0->1) C-V^dag(1->3) CNOT(0->1) C-V(0->2)` with
/// `V = sqrt(sigma_x)` (0-based wires, target is qubit 2).
pub fn decompose_toffoli() -> GateSequence {
    let v = GateKind::ControlledXPower(0.5);
    let v_dag = GateKind::ControlledXPower(-0.5);
    let mut seq = GateSequence::new(3);
    for (kind, wires) in [
        (v, [1, 2]),
        (GateKind::Cnot, [0, 1]),
        (v_dag, [1, 2]),
        (GateKind::Cnot, [0, 1]),
        (v, [0, 2]),
    ] {
        seq.push(kind, &wires).expect("static wiring");
    }
    seq
}

/// `Lambda_3(not)` from thirteen two-qubit gates. Controlled `W^{+-1}`,
/// `W = sigma_x^{1/4}`, is applied once for every non-empty subset of the
/// controls, from a wire that holds the parity of that subset; CNOTs walk a
/// Gray code between parities. Odd subsets get `W`, even ones `W^dag`, and
/// the exponents sum to `4 x1 x2 x3`.
pub fn decompose_lambda3() -> GateSequence {
    let w = GateKind::ControlledXPower(0.25);
    let w_dag = GateKind::ControlledXPower(-0.25);
    let c = GateKind::Cnot;
    let mut seq = GateSequence::new(4);
    for (kind, wires) in [
        (w, [0, 3]),     // x1
        (c, [0, 1]),     // wire 1 = x1^x2
        (w_dag, [1, 3]), // x1^x2
        (c, [0, 1]),     // wire 1 = x2
        (w, [1, 3]),     // x2
        (c, [1, 2]),     // wire 2 = x2^x3
        (w_dag, [2, 3]), // x2^x3
        (c, [0, 2]),     // wire 2 = x1^x2^x3
        (w, [2, 3]),     // x1^x2^x3
        (c, [1, 2]),     // wire 2 = x1^x3
        (w_dag, [2, 3]), // x1^x3
        (c, [0, 2]),     // wire 2 = x3
        (w, [2, 3]),     // x3
    ] {
        seq.push(kind, &wires).expect("static wiring");
    }
    seq
}

/// Networks for the two gate sizes the decompositions cover.
pub fn decompose(n_controls: usize) -> Result<GateSequence> {
    match n_controls {
        2 => Ok(decompose_toffoli()),
        3 => Ok(decompose_lambda3()),
        n => Err(Error::InvalidParameter(format!(
            "no two-qubit network for Lambda_{n}(not); supported: 2, 3"
        ))),
    }
}

/// Two ideal spin-selective pi/2 rotations of the target (about x, then
/// about y, in the frame of the target multiplet) separated by a coupling
/// delay of `1/(2J)`. The result is CNOT up to relative phases.
pub fn modified_cnot_pulse_program(
    system: &SpinSystem,
    control: usize,
    target: usize,
) -> Result<PulseProgram> {
    let (j, center) = two_spin_setup(system, control, target)?;
    let rot = |phase| {
        Event::Rotation(Rotation {
            spin: target,
            angle_rad: PI / 2.0,
            phase_rad: phase,
            carrier_hz: center,
        })
    };
    PulseProgram::new(vec![
        rot(0.0),
        Event::Delay {
            duration_s: 1.0 / (2.0 * j.abs()),
        },
        rot(PI / 2.0),
    ])
}

/// The same scheme with finite rectangular pulses at `amplitude_hz`
/// centred on the target multiplet. Each pi/2 pulse of length `tp` carries
/// about `2 tp / pi` of coupling evolution, so the delay is shortened by
/// `4 tp / pi`.
pub fn modified_cnot_shaped_program(
    system: &SpinSystem,
    control: usize,
    target: usize,
    amplitude_hz: f64,
) -> Result<PulseProgram> {
    let (j, center) = two_spin_setup(system, control, target)?;
    if !(amplitude_hz > 0.0) {
        return Err(Error::InvalidParameter(
            "pulse amplitude must be positive".into(),
        ));
    }
    let tp = Pulse::duration_for(PI / 2.0, amplitude_hz, Shape::Rectangular);
    let delay = 1.0 / (2.0 * j.abs()) - 4.0 * tp / PI;
    if delay < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pulses at {amplitude_hz} Hz are too long for a 1/(2J) delay"
        )));
    }
    let pulse = |axis: f64| {
        Event::Pulse(Pulse {
            carrier_hz: center,
            amplitude_hz,
            phase_rad: axis + PI,
            duration_s: tp,
            shape: Shape::Rectangular,
        })
    };
    PulseProgram::new(vec![
        pulse(0.0),
        Event::Delay { duration_s: delay },
        pulse(PI / 2.0),
    ])
}

fn two_spin_setup(system: &SpinSystem, control: usize, target: usize) -> Result<(f64, f64)> {
    if system.n_spins() != 2 {
        return Err(Error::InvalidParameter(format!(
            "the modified CNOT program needs a 2-spin register, got {}",
            system.n_spins()
        )));
    }
    system.check_spin(control)?;
    system.check_spin(target)?;
    if control == target {
        return Err(Error::InvalidWires("control and target coincide".into()));
    }
    let j = system.coupling_hz(control, target);
    if j == 0.0 {
        return Err(Error::Unresolvable(
            "control and target are uncoupled".into(),
        ));
    }
    Ok((j, system.multiplet_center_hz(target)?))
}

/// Default drive amplitude as a fraction of the smallest target coupling.
pub const DEFAULT_SELECTIVITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// Fraction of the smallest |J| between the target and a control.
    RelativeToJmin(f64),
    Hz(f64),
}

impl Default for Amplitude {
    fn default() -> Self {
        Amplitude::RelativeToJmin(DEFAULT_SELECTIVITY)
    }
}

/// A single transition-selective pi pulse implementing the modified
/// `Lambda_{n-1}(not)` on `controls -> target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPulseSpec {
    pub controls: Vec<usize>,
    pub target: usize,
    pub amplitude: Amplitude,
    pub shape: Shape,
}

impl LambdaPulseSpec {
    pub fn new(controls: Vec<usize>, target: usize) -> Self {
        LambdaPulseSpec {
            controls,
            target,
            amplitude: Amplitude::default(),
            shape: Shape::default(),
        }
    }

    fn check(&self, system: &SpinSystem) -> Result<()> {
        system.check_spin(self.target)?;
        let n = system.n_spins();
        let mut seen = vec![false; n];
        seen[self.target] = true;
        for &c in &self.controls {
            system.check_spin(c)?;
            if seen[c] {
                return Err(Error::InvalidWires(format!("spin {c} used twice")));
            }
            seen[c] = true;
        }
        if self.controls.is_empty() || seen.iter().any(|s| !s) {
            return Err(Error::InvalidWires(
                "controls and target must cover every spin of the register".into(),
            ));
        }
        for &c in &self.controls {
            if system.coupling_hz(c, self.target) == 0.0 {
                return Err(Error::Unresolvable(format!(
                    "spin {} is not coupled to target spin {}",
                    c + 1,
                    self.target + 1
                )));
            }
        }
        Ok(())
    }

    pub fn min_coupling_hz(&self, system: &SpinSystem) -> f64 {
        self.controls
            .iter()
            .map(|&c| system.coupling_hz(c, self.target).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn amplitude_hz(&self, system: &SpinSystem) -> f64 {
        match self.amplitude {
            Amplitude::RelativeToJmin(r) => r * self.min_coupling_hz(system),
            Amplitude::Hz(a) => a,
        }
    }

    /// `modified_lambda_not` wired as `controls ++ [target]` in the register.
    pub fn ideal_gate(&self, system: &SpinSystem) -> Result<UnitaryGate> {
        self.check(system)?;
        let mut wires = self.controls.clone();
        wires.push(self.target);
        gates::embed(
            &gates::modified_lambda_not(self.controls.len())?,
            &wires,
            system.n_spins(),
        )
    }

    /// Carrier on the line with every control in |1>.
    pub fn carrier_hz(&self, system: &SpinSystem) -> Result<f64> {
        self.check(system)?;
        let pattern = self.all_controls_one(system);
        let carrier = system.transition_frequency(self.target, &pattern)?;
        let min_j = self.min_coupling_hz(system);
        for (p, f) in system.target_lines(self.target)? {
            if p != pattern && (f - carrier).abs() < min_j * (1.0 - 1e-9) {
                return Err(Error::Unresolvable(format!(
                    "line {p} at {f} Hz lies within {min_j} Hz of the carrier {carrier} Hz"
                )));
            }
        }
        Ok(carrier)
    }

    /// Pattern over the non-target spins (ascending spin order) in which
    /// every control is 1.
    fn all_controls_one(&self, system: &SpinSystem) -> ControlPattern {
        let bits = (0..system.n_spins())
            .filter(|&k| k != self.target)
            .map(|k| self.controls.contains(&k))
            .collect();
        ControlPattern::new(bits)
    }

    pub fn program(&self, system: &SpinSystem) -> Result<PulseProgram> {
        let carrier_hz = self.carrier_hz(system)?;
        let amplitude_hz = self.amplitude_hz(system);
        if !(amplitude_hz > 0.0) || !amplitude_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pulse amplitude {amplitude_hz} Hz"
            )));
        }
        // phase pi puts the nutation axis on +x, realising -i sigma_x
        PulseProgram::new(vec![Event::Pulse(Pulse {
            carrier_hz,
            amplitude_hz,
            phase_rad: PI,
            duration_s: Pulse::duration_for(PI, amplitude_hz, self.shape),
            shape: self.shape,
        })])
    }
}

/// Default single-pulse program: rectangular, amplitude `J_min / 5`.
pub fn lambda_pulse_program(
    system: &SpinSystem,
    controls: &[usize],
    target: usize,
) -> Result<PulseProgram> {
    LambdaPulseSpec::new(controls.to_vec(), target).program(system)
}
