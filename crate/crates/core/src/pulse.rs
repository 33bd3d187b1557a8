//! Time-domain propagation of RF pulse programs under the weak-coupling
//! drift plus a circularly polarised drive that couples to every spin.
//!
//! During a pulse the drive is
//! `H_rf(t) = -pi a env(t) sum_k [cos(theta) sx_k + sin(theta) sy_k]`,
//! `theta = 2 pi f t + phase`, with `t` the absolute program time. Writing
//! `R(theta) = exp(-i theta Fz)` this is `R H_x R^dag`, and because the
//! drift is diagonal it commutes with `Fz`. The default integrator therefore
//! steps in the frame rotating with the carrier, where a rectangular pulse is
//! time independent and a shaped pulse only varies through its envelope. The
//! change of frame is exact; no rotating-wave approximation is made.
//!
//! A pulse with phase `phi` nutates about the transverse axis at `phi + pi`.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{self, UnitaryGate};
use crate::linalg::{self, CMatrix};
use crate::spin_system::SpinSystem;
use crate::states::{self, DensityMatrix};

/// Slices per period of the fastest frequency in the problem.
pub const SLICES_PER_PERIOD: f64 = 40.0;
pub const MAX_SLICES: u64 = 100_000_000;

/// `erf(3 / sqrt 2)`: area of a unit gaussian kept within +/-3 sigma.
const ERF_3_OVER_SQRT2: f64 = 0.997_300_203_936_739_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shape {
    #[default]
    Rectangular,
    /// Peak-normalised gaussian, `sigma = duration / 6`, cut at +/-3 sigma.
    Gaussian,
}

impl Shape {
    pub fn envelope(self, t: f64, duration: f64) -> f64 {
        match self {
            Shape::Rectangular => 1.0,
            Shape::Gaussian => {
                let sigma = duration / 6.0;
                let x = t - duration / 2.0;
                (-(x * x) / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// Time average of the envelope over the pulse.
    pub fn mean_envelope(self) -> f64 {
        match self {
            Shape::Rectangular => 1.0,
            Shape::Gaussian => (2.0 * PI).sqrt() * ERF_3_OVER_SQRT2 / 6.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Rectangular => "rect",
            Shape::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangular" => Ok(Shape::Rectangular),
            "gaussian" | "gauss" => Ok(Shape::Gaussian),
            _ => Err(Error::InvalidParameter(format!(
                "unknown pulse shape `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub carrier_hz: f64,
    /// Peak nutation rate.
    pub amplitude_hz: f64,
    pub phase_rad: f64,
    pub duration_s: f64,
    pub shape: Shape,
}

impl Pulse {
    /// Nutation angle on resonance.
    pub fn flip_angle(&self) -> f64 {
        2.0 * PI * self.amplitude_hz * self.duration_s * self.shape.mean_envelope()
    }

    /// Duration giving flip angle `angle` at peak amplitude `amplitude_hz`.
    pub fn duration_for(angle: f64, amplitude_hz: f64, shape: Shape) -> f64 {
        angle / (2.0 * PI * amplitude_hz * shape.mean_envelope())
    }
}

/// Instantaneous, spin-selective rotation about the transverse axis at
/// `phase_rad` in the frame rotating at `carrier_hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub spin: usize,
    pub angle_rad: f64,
    pub phase_rad: f64,
    pub carrier_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Delay { duration_s: f64 },
    Pulse(Pulse),
    Rotation(Rotation),
}

impl Event {
    pub fn duration_s(&self) -> f64 {
        match self {
            Event::Delay { duration_s } => *duration_s,
            Event::Pulse(p) => p.duration_s,
            Event::Rotation(_) => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match self {
            Event::Delay { duration_s } => {
                finite(*duration_s, "delay")?;
                if *duration_s <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "delay duration must be positive".into(),
                    ));
                }
            }
            Event::Pulse(p) => {
                finite(p.carrier_hz, "carrier")?;
                finite(p.amplitude_hz, "amplitude")?;
                finite(p.phase_rad, "phase")?;
                finite(p.duration_s, "duration")?;
                if p.duration_s <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "pulse duration must be positive".into(),
                    ));
                }
                if p.amplitude_hz < 0.0 {
                    return Err(Error::InvalidParameter(
                        "pulse amplitude must be non-negative".into(),
                    ));
                }
            }
            Event::Rotation(r) => {
                finite(r.angle_rad, "angle")?;
                finite(r.phase_rad, "phase")?;
                finite(r.carrier_hz, "carrier")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseProgram {
    events: Vec<Event>,
}

impl PulseProgram {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        events.iter().try_for_each(Event::validate)?;
        Ok(PulseProgram { events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn total_duration_s(&self) -> f64 {
        self.events.iter().map(Event::duration_s).sum()
    }

    /// One event per line, `kind key=value ...`; spins are 1-based.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{}", EventLine(e));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let event = parse_event(line).map_err(err)?;
            event.validate().map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            events.push(event);
        }
        Ok(PulseProgram { events })
    }
}

struct EventLine<'a>(&'a Event);

impl fmt::Display for EventLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Event::Delay { duration_s } => write!(f, "delay duration_s={duration_s}"),
            Event::Pulse(p) => write!(
                f,
                "pulse carrier_hz={} amplitude_hz={} angle_rad={} duration_s={} phase_rad={} shape={}",
                p.carrier_hz,
                p.amplitude_hz,
                p.flip_angle(),
                p.duration_s,
                p.phase_rad,
                p.shape.name()
            ),
            Event::Rotation(r) => write!(
                f,
                "rotation spin={} carrier_hz={} angle_rad={} phase_rad={}",
                r.spin + 1,
                r.carrier_hz,
                r.angle_rad,
                r.phase_rad
            ),
        }
    }
}

fn parse_event(line: &str) -> std::result::Result<Event, String> {
    let mut tokens = line.split_whitespace();
    let kind = tokens.next().ok_or("empty line")?;
    let mut fields = std::collections::BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{tok}`"))?;
        if fields.insert(k, v).is_some() {
            return Err(format!("duplicate field `{k}`"));
        }
    }
    let mut take = |k: &str| fields.remove(k).ok_or_else(|| format!("missing `{k}`"));
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let event = match kind {
        "delay" => Event::Delay {
            duration_s: num(take("duration_s")?)?,
        },
        "pulse" => {
            let p = Pulse {
                carrier_hz: num(take("carrier_hz")?)?,
                amplitude_hz: num(take("amplitude_hz")?)?,
                phase_rad: num(take("phase_rad")?)?,
                duration_s: num(take("duration_s")?)?,
                shape: take("shape")?.parse().map_err(|e: Error| e.to_string())?,
            };
            if let Ok(angle) = take("angle_rad") {
                let angle = num(angle)?;
                if (angle - p.flip_angle()).abs() > 1e-9 * angle.abs().max(1.0) {
                    return Err(format!(
                        "angle_rad={angle} disagrees with amplitude and duration ({})",
                        p.flip_angle()
                    ));
                }
            }
            Event::Pulse(p)
        }
        "rotation" => {
            let spin: usize = take("spin")?.parse().map_err(|e| format!("spin: {e}"))?;
            if spin == 0 {
                return Err("spins are numbered from 1".into());
            }
            Event::Rotation(Rotation {
                spin: spin - 1,
                carrier_hz: num(take("carrier_hz")?)?,
                angle_rad: num(take("angle_rad")?)?,
                phase_rad: num(take("phase_rad")?)?,
            })
        }
        other => return Err(format!("unknown event kind `{other}`")),
    };
    if let Some(k) = fields.keys().next() {
        return Err(format!("unknown field `{k}`"));
    }
    Ok(event)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Exact transformation to the carrier frame, slicing only the envelope.
    #[default]
    RotatingFrame,
    /// Midpoint slicing of the explicitly time-dependent drive.
    LabFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationOptions {
    pub integrator: Integrator,
    /// Overrides the default slice length.
    pub max_step_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Propagator {
    pub gate: UnitaryGate,
    pub slices: u64,
    pub max_slice_s: f64,
    pub duration_s: f64,
}

impl Propagator {
    pub fn diagnostics(&self, ideal: Option<&UnitaryGate>) -> String {
        let mut out = String::new();
        if let Some(ideal) = ideal {
            if let (Ok(raw), Ok(stripped)) = (
                gates::gate_fidelity(ideal, &self.gate),
                gates::phase_stripped_fidelity(ideal, &self.gate),
            ) {
                let _ = writeln!(out, "fidelity_raw={raw:.9}");
                let _ = writeln!(out, "fidelity_phase_stripped={stripped:.9}");
            }
        }
        let _ = writeln!(out, "slices={}", self.slices);
        let _ = writeln!(out, "max_slice_s={:e}", self.max_slice_s);
        let _ = writeln!(out, "duration_s={}", self.duration_s);
        let _ = writeln!(out, "unitarity_error={:.3e}", self.gate.unitarity_error());
        out
    }
}

/// Default slice length `1 / (40 f_max)`, `f_max` the largest of the
/// carriers, offsets, amplitudes and couplings.
pub fn default_step_s(system: &SpinSystem, program: &PulseProgram) -> f64 {
    let mut f_max = system
        .offsets_hz()
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    f_max = system
        .couplings_hz()
        .iter()
        .flatten()
        .fold(f_max, |a, v| a.max(v.abs()));
    for e in program.events() {
        if let Event::Pulse(p) = e {
            f_max = f_max.max(p.carrier_hz.abs()).max(p.amplitude_hz);
        }
    }
    if f_max == 0.0 {
        f_max = 1.0;
    }
    1.0 / (SLICES_PER_PERIOD * f_max)
}

struct Operators {
    energies: Vec<f64>,
    fz: Vec<f64>,
    x_all: CMatrix,
    y_all: CMatrix,
}

impl Operators {
    fn new(system: &SpinSystem) -> Self {
        let n = system.n_spins();
        let d = system.dim();
        let fz = (0..d)
            .map(|i| (0..n).map(|k| system.z_sign(i, k)).sum::<f64>() / 2.0)
            .collect();
        let sum_of = |op: &UnitaryGate| {
            (0..n).fold(CMatrix::zeros(d, d), |acc, k| {
                acc + gates::embed(op, &[k], n)
                    .expect("single wire")
                    .into_matrix()
            })
        };
        let y = UnitaryGate::from_matrix_unchecked(linalg::pauli_y());
        Operators {
            energies: system.energies(),
            fz,
            x_all: sum_of(&gates::pauli_x()),
            y_all: sum_of(&y),
        }
    }

    /// `R(theta) = exp(-i theta Fz)` as its diagonal.
    fn frame(&self, theta: f64) -> Vec<Complex64> {
        self.fz
            .iter()
            .map(|m| Complex64::from_polar(1.0, -theta * m))
            .collect()
    }

    fn drift_diag(&self) -> CMatrix {
        let e: Vec<Complex64> = self.energies.iter().map(|&v| v.into()).collect();
        linalg::diag(&e)
    }
}

fn scale_rows(m: &mut CMatrix, diag: &[Complex64]) {
    for (r, s) in diag.iter().enumerate() {
        for c in 0..m.ncols() {
            m[(r, c)] *= s;
        }
    }
}

fn scale_cols(m: &mut CMatrix, diag: &[Complex64]) {
    for (c, s) in diag.iter().enumerate() {
        for r in 0..m.nrows() {
            m[(r, c)] *= s;
        }
    }
}

pub fn program_unitary(system: &SpinSystem, program: &PulseProgram) -> Result<Propagator> {
    program_unitary_with(system, program, PropagationOptions::default())
}

pub fn program_unitary_with(
    system: &SpinSystem,
    program: &PulseProgram,
    options: PropagationOptions,
) -> Result<Propagator> {
    let step = options
        .max_step_s
        .unwrap_or_else(|| default_step_s(system, program));
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(
            "slice length must be positive".into(),
        ));
    }
    for e in program.events() {
        if let Event::Rotation(r) = e {
            system.check_spin(r.spin)?;
        }
    }

    let slice_count = |p: &Pulse| -> u64 {
        match (options.integrator, p.shape) {
            (Integrator::RotatingFrame, Shape::Rectangular) => 1,
            _ => (p.duration_s / step).ceil().max(1.0) as u64,
        }
    };
    let total: u64 = program
        .events()
        .iter()
        .map(|e| match e {
            Event::Pulse(p) => slice_count(p),
            _ => 1,
        })
        .sum();
    if total > MAX_SLICES {
        return Err(Error::TooManySlices(total));
    }

    let ops = Operators::new(system);
    let n = system.n_spins();
    let d = system.dim();
    let mut u = linalg::identity(d);
    let mut t = 0.0;
    let mut slices = 0u64;
    let mut max_slice: f64 = 0.0;

    for event in program.events() {
        match *event {
            Event::Delay { duration_s } => {
                let phases: Vec<Complex64> = ops
                    .energies
                    .iter()
                    .map(|e| Complex64::from_polar(1.0, -e * duration_s))
                    .collect();
                scale_rows(&mut u, &phases);
                t += duration_s;
                slices += 1;
                max_slice = max_slice.max(duration_s);
            }
            Event::Rotation(r) => {
                let axis = r.phase_rad + 2.0 * PI * r.carrier_hz * t;
                let rot =
                    gates::embed(&gates::transverse_rotation(axis, r.angle_rad), &[r.spin], n)?;
                u = rot.matrix() * u;
            }
            Event::Pulse(p) => {
                let count = slice_count(&p);
                let dt = p.duration_s / count as f64;
                let step_u = match options.integrator {
                    Integrator::RotatingFrame => rotating_frame_pulse(&ops, &p, t, count),
                    Integrator::LabFrame => lab_frame_pulse(&ops, &p, t, count),
                };
                u = step_u * u;
                t += p.duration_s;
                slices += count;
                max_slice = max_slice.max(dt);
            }
        }
    }

    Ok(Propagator {
        gate: UnitaryGate::from_matrix_unchecked(u),
        slices,
        max_slice_s: max_slice,
        duration_s: t,
    })
}

fn rotating_frame_pulse(ops: &Operators, p: &Pulse, t0: f64, count: u64) -> CMatrix {
    let d = ops.energies.len();
    let omega_c = 2.0 * PI * p.carrier_hz;
    let shifted: Vec<Complex64> = ops
        .energies
        .iter()
        .zip(&ops.fz)
        .map(|(e, m)| (e - omega_c * m).into())
        .collect();
    let base = linalg::diag(&shifted);
    let dt = p.duration_s / count as f64;
    let mut u = linalg::identity(d);
    for j in 0..count {
        let env = p.shape.envelope((j as f64 + 0.5) * dt, p.duration_s);
        let h = &base + &ops.x_all * Complex64::from(-PI * p.amplitude_hz * env);
        u = linalg::expm_hermitian(&h, dt) * u;
    }
    let theta0 = omega_c * t0 + p.phase_rad;
    let theta1 = omega_c * (t0 + p.duration_s) + p.phase_rad;
    let into_frame: Vec<Complex64> = ops.frame(theta0).iter().map(|z| z.conj()).collect();
    scale_cols(&mut u, &into_frame);
    scale_rows(&mut u, &ops.frame(theta1));
    u
}

fn lab_frame_pulse(ops: &Operators, p: &Pulse, t0: f64, count: u64) -> CMatrix {
    let d = ops.energies.len();
    let drift = ops.drift_diag();
    let dt = p.duration_s / count as f64;
    let mut u = linalg::identity(d);
    for j in 0..count {
        let local = (j as f64 + 0.5) * dt;
        let theta = 2.0 * PI * p.carrier_hz * (t0 + local) + p.phase_rad;
        let a = -PI * p.amplitude_hz * p.shape.envelope(local, p.duration_s);
        let h = &drift
            + &ops.x_all * Complex64::from(a * theta.cos())
            + &ops.y_all * Complex64::from(a * theta.sin());
        u = linalg::expm_hermitian(&h, dt) * u;
    }
    u
}

/// `U rho U^dag` with `U` the program propagator.
pub fn propagate_state(
    system: &SpinSystem,
    program: &PulseProgram,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    if rho.dim() != system.dim() {
        return Err(Error::Dimension(
            "density matrix does not match the register".into(),
        ));
    }
    let prop = program_unitary(system, program)?;
    Ok(states::evolve(rho, prop.gate.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub amplitude_hz: f64,
    pub fidelity_raw: f64,
    pub fidelity_phase_stripped: f64,
}

/// Fidelity of the transition-selective pi pulse against the ideal modified
/// gate as a function of drive amplitude, ascending in amplitude.
pub fn selectivity_scan(
    system: &SpinSystem,
    template: &crate::compiler::LambdaPulseSpec,
    amplitudes_hz: &[f64],
) -> Result<Vec<ScanPoint>> {
    if amplitudes_hz.is_empty() {
        return Err(Error::InvalidParameter(
            "selectivity scan needs at least one amplitude".into(),
        ));
    }
    let ideal = template.ideal_gate(system)?;
    let mut amps = amplitudes_hz.to_vec();
    amps.sort_by(f64::total_cmp);
    amps.iter()
        .map(|&a| {
            let spec = crate::compiler::LambdaPulseSpec {
                amplitude: crate::compiler::Amplitude::Hz(a),
                ..template.clone()
            };
            let program = spec.program(system)?;
            let prop = program_unitary(system, &program)?;
            Ok(ScanPoint {
                amplitude_hz: a,
                fidelity_raw: gates::gate_fidelity(&ideal, &prop.gate)?,
                fidelity_phase_stripped: gates::phase_stripped_fidelity(&ideal, &prop.gate)?,
            })
        })
        .collect()
}
