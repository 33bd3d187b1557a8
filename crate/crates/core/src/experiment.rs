//! Config-driven reproduction runs: thermal input, gate realisation,
//! before/after spectra, peak tables and fidelity cross-checks.
//!
//! Config files are TOML. Spins are numbered from 1 and every physical
//! quantity carries its unit in the key (`_hz`, `_s`, `_rad`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::compiler::{self, Amplitude, LambdaPulseSpec};
use crate::error::{Error, Result};
use crate::gates::{self, UnitaryGate};
use crate::pulse::{self, Shape};
use crate::spectrum::{self, AcquisitionParams, LabeledPeak, Spectrum};
use crate::spin_system::{ControlPattern, SpinSystem, SystemFile, PRESETS};
use crate::states::{self, DensityMatrix, DEFAULT_BETA_SCALE};

/// Phase-stripped fidelity a single-pulse run must reach.
pub const DEFAULT_MIN_FIDELITY: f64 = 0.99;
/// Allowed deviation of each output line from the ideal-gate prediction,
/// relative to that line's input height.
pub const DEFAULT_HEIGHT_TOLERANCE: f64 = 0.05;
/// Network fidelity required of a decomposed realisation.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub output_dir: Option<String>,
    pub system: SystemConfig,
    pub gate: GateConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub checks: ChecksConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub offsets_hz: Option<Vec<f64>>,
    pub couplings_hz: Option<Vec<Vec<f64>>>,
    pub larmor_hz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    Ideal,
    SinglePulse,
    Decomposed,
}

impl Realization {
    fn name(self) -> &'static str {
        match self {
            Realization::Ideal => "ideal",
            Realization::SinglePulse => "single_pulse",
            Realization::Decomposed => "decomposed",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub n_controls: Option<usize>,
    pub controls: Vec<usize>,
    pub target: usize,
    pub realization: Realization,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub amplitude_hz: Option<f64>,
    pub amplitude_rel_jmin: Option<f64>,
    pub shape: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub dwell_s: Option<f64>,
    pub points: Option<usize>,
    pub line_broadening_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub beta_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub amplitudes_hz: Option<Vec<f64>>,
    pub amplitudes_rel_jmin: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    pub min_fidelity: Option<f64>,
    pub height_tolerance: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| locate_key(text, s.start))
                .unwrap_or_default();
            Error::config(path, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Resolved, validated form of the config.
    pub fn resolve(&self) -> Result<Experiment> {
        let system = self.system.build()?;
        let n = system.n_spins();

        let to_index = |v: usize, path: &str| {
            if v == 0 || v > n {
                Err(Error::config(path, format!("spin {v} outside 1..={n}")))
            } else {
                Ok(v - 1)
            }
        };
        let target = to_index(self.gate.target, "gate.target")?;
        let controls = self
            .gate
            .controls
            .iter()
            .map(|&c| to_index(c, "gate.controls"))
            .collect::<Result<Vec<_>>>()?;
        if let Some(nc) = self.gate.n_controls {
            if nc != controls.len() {
                return Err(Error::config(
                    "gate.n_controls",
                    format!("{nc} does not match {} listed controls", controls.len()),
                ));
            }
        }
        if controls.is_empty() {
            return Err(Error::config(
                "gate.controls",
                "at least one control is required",
            ));
        }
        let mut seen = vec![false; n];
        seen[target] = true;
        for &c in &controls {
            if seen[c] {
                return Err(Error::config(
                    "gate.controls",
                    format!("spin {} repeated or equal to target", c + 1),
                ));
            }
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::config(
                "gate.controls",
                "controls and target must cover every spin",
            ));
        }
        let realization = self.gate.realization;
        if realization == Realization::Decomposed && !(2..=3).contains(&controls.len()) {
            return Err(Error::config(
                "gate.realization",
                "decomposed networks exist for 2 or 3 controls only",
            ));
        }

        let shape = match &self.pulse.shape {
            Some(s) => s
                .parse::<Shape>()
                .map_err(|e| Error::config("pulse.shape", e.to_string()))?,
            None => Shape::default(),
        };
        let amplitude = match (self.pulse.amplitude_hz, self.pulse.amplitude_rel_jmin) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "pulse",
                    "give amplitude_hz or amplitude_rel_jmin, not both",
                ))
            }
            (Some(a), None) => positive(a, "pulse.amplitude_hz").map(Amplitude::Hz)?,
            (None, Some(r)) => {
                positive(r, "pulse.amplitude_rel_jmin").map(Amplitude::RelativeToJmin)?
            }
            (None, None) => Amplitude::default(),
        };
        let pulse_spec = LambdaPulseSpec {
            controls: controls.clone(),
            target,
            amplitude,
            shape,
        };
        if realization == Realization::SinglePulse {
            pulse_spec
                .carrier_hz(&system)
                .map_err(|e| Error::config("gate.realization", e.to_string()))?;
        }

        let defaults = AcquisitionParams::default();
        let acquisition = AcquisitionParams {
            dwell_s: self.acquisition.dwell_s.unwrap_or(defaults.dwell_s),
            points: self.acquisition.points.unwrap_or(defaults.points),
            line_broadening_hz: self
                .acquisition
                .line_broadening_hz
                .unwrap_or(defaults.line_broadening_hz),
        };
        acquisition
            .validate()
            .map_err(|e| Error::config("acquisition", e.to_string()))?;

        let beta_scale = positive(
            self.thermal.beta_scale.unwrap_or(DEFAULT_BETA_SCALE),
            "thermal.beta_scale",
        )?;
        let min_fidelity = self.checks.min_fidelity.unwrap_or(DEFAULT_MIN_FIDELITY);
        let height_tolerance = positive(
            self.checks
                .height_tolerance
                .unwrap_or(DEFAULT_HEIGHT_TOLERANCE),
            "checks.height_tolerance",
        )?;

        Ok(Experiment {
            system,
            controls,
            target,
            realization,
            pulse: pulse_spec,
            acquisition,
            beta_scale,
            min_fidelity,
            height_tolerance,
        })
    }

    pub fn scan_amplitudes(&self, exp: &Experiment) -> Result<Vec<f64>> {
        let scan = self
            .scan
            .as_ref()
            .ok_or_else(|| Error::config("scan", "missing [scan] table"))?;
        let amps = match (&scan.amplitudes_hz, &scan.amplitudes_rel_jmin) {
            (Some(a), None) => a.clone(),
            (None, Some(r)) => {
                let jmin = exp.pulse.min_coupling_hz(&exp.system);
                r.iter().map(|x| x * jmin).collect()
            }
            _ => {
                return Err(Error::config(
                    "scan",
                    "give exactly one of amplitudes_hz, amplitudes_rel_jmin",
                ))
            }
        };
        if amps.is_empty() {
            return Err(Error::config("scan", "amplitude list is empty"));
        }
        for a in &amps {
            positive(*a, "scan")?;
        }
        Ok(amps)
    }
}

fn positive(v: f64, path: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be positive, got {v}")))
    }
}

/// Best-effort dotted key path for a byte offset in a TOML document.
fn locate_key(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let end = text[offset.min(text.len())..]
        .find('\n')
        .map_or(text.len(), |i| offset + i);
    for line in text[..end].lines() {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            key = k.trim().to_string();
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

impl SystemConfig {
    pub fn build(&self) -> Result<SpinSystem> {
        let inline = self.n.is_some()
            || self.offsets_hz.is_some()
            || self.couplings_hz.is_some()
            || self.larmor_hz.is_some();
        match (&self.preset, inline) {
            (Some(name), false) => {
                SpinSystem::preset(name).map_err(|e| Error::config("system.preset", e.to_string()))
            }
            (Some(_), true) => Err(Error::config(
                "system",
                "give either a preset or an inline system, not both",
            )),
            (None, _) => {
                let file = SystemFile {
                    name: None,
                    description: None,
                    n: self.n.ok_or_else(|| Error::config("system.n", "missing"))?,
                    offsets_hz: self
                        .offsets_hz
                        .clone()
                        .ok_or_else(|| Error::config("system.offsets_hz", "missing"))?,
                    couplings_hz: self
                        .couplings_hz
                        .clone()
                        .ok_or_else(|| Error::config("system.couplings_hz", "missing"))?,
                    larmor_hz: self.larmor_hz.clone(),
                };
                file.build().map_err(|e| match e {
                    Error::Config { .. } => e,
                    other => Error::config("system", other.to_string()),
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub system: SpinSystem,
    pub controls: Vec<usize>,
    pub target: usize,
    pub realization: Realization,
    pub pulse: LambdaPulseSpec,
    pub acquisition: AcquisitionParams,
    pub beta_scale: f64,
    pub min_fidelity: f64,
    pub height_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: Status,
    /// File name to contents, written verbatim.
    pub files: BTreeMap<String, String>,
    pub input_spectrum: Spectrum,
    pub output_spectrum: Spectrum,
    pub input_peaks: Vec<LabeledPeak>,
    pub output_peaks: Vec<LabeledPeak>,
    pub fidelity_raw: f64,
    pub fidelity_phase_stripped: f64,
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> &str {
        &self.files["report.txt"]
    }
}

impl Experiment {
    fn wires(&self) -> Vec<usize> {
        let mut w = self.controls.clone();
        w.push(self.target);
        w
    }

    fn embed(&self, g: &UnitaryGate) -> Result<UnitaryGate> {
        gates::embed(g, &self.wires(), self.system.n_spins())
    }

    pub fn run(&self) -> Result<RunReport> {
        let nc = self.controls.len();
        let sys = &self.system;
        let exact = self.embed(&gates::lambda_not(nc))?;
        let mut files = BTreeMap::new();
        let mut report = String::new();
        let mut failures = Vec::new();

        let _ = writeln!(report, "realization={}", self.realization.name());
        let _ = writeln!(
            report,
            "gate=Lambda_{nc}(not) controls={} target={}",
            self.controls
                .iter()
                .map(|c| (c + 1).to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.target + 1
        );

        let (realized, reference) = match self.realization {
            Realization::Ideal => (exact.clone(), exact.clone()),
            Realization::Decomposed => {
                let seq = compiler::decompose(nc)?;
                let net = compiler::sequence_unitary(&seq)?;
                let verify = gates::gate_fidelity(&gates::lambda_not(nc), &net)?;
                let _ = writeln!(report, "two_qubit_gates={}", seq.two_qubit_count());
                let _ = writeln!(report, "network_fidelity={verify:.12}");
                if 1.0 - verify > DECOMPOSITION_TOLERANCE {
                    failures.push(format!(
                        "network fidelity {verify} below 1 - {DECOMPOSITION_TOLERANCE:e}"
                    ));
                }
                files.insert("sequence.txt".to_string(), seq.to_text());
                (self.embed(&net)?, exact.clone())
            }
            Realization::SinglePulse => {
                let program = self.pulse.program(sys)?;
                let prop = pulse::program_unitary(sys, &program)?;
                let ideal = self.pulse.ideal_gate(sys)?;
                files.insert("pulse_program.txt".to_string(), program.to_text());
                files.insert("propagator.txt".to_string(), prop.diagnostics(Some(&ideal)));
                let _ = writeln!(report, "pulse_shape={}", self.pulse.shape.name());
                let _ = writeln!(
                    report,
                    "pulse_amplitude_hz={}",
                    self.pulse.amplitude_hz(sys)
                );
                let _ = writeln!(report, "pulse_carrier_hz={}", self.pulse.carrier_hz(sys)?);
                let _ = writeln!(report, "pulse_duration_s={}", program.total_duration_s());
                (prop.gate, ideal)
            }
        };

        let fidelity_raw = gates::gate_fidelity(&reference, &realized)?;
        let fidelity_phase_stripped = gates::phase_stripped_fidelity(&reference, &realized)?;
        let fidelity_vs_exact = gates::phase_stripped_fidelity(&exact, &realized)?;
        let _ = writeln!(report, "fidelity_raw={fidelity_raw:.9}");
        let _ = writeln!(
            report,
            "fidelity_phase_stripped={fidelity_phase_stripped:.9}"
        );
        let _ = writeln!(
            report,
            "fidelity_phase_stripped_vs_lambda_not={fidelity_vs_exact:.9}"
        );
        if self.realization == Realization::SinglePulse
            && fidelity_phase_stripped < self.min_fidelity
        {
            failures.push(format!(
                "phase-stripped fidelity {fidelity_phase_stripped:.6} below {}",
                self.min_fidelity
            ));
        }

        let rho_in = states::thermal_state(sys, self.beta_scale)?;
        let rho_out = states::apply_gate(&rho_in, &realized)?;
        let rho_ideal = states::apply_gate(&rho_in, &exact)?;

        let input_spectrum = spectrum::observe(sys, &rho_in, self.target, &self.acquisition)?;
        let output_spectrum = spectrum::observe(sys, &rho_out, self.target, &self.acquisition)?;
        let (input_peaks, input_stray) =
            spectrum::partition_peaks(&input_spectrum, sys, self.target)?;
        let (output_peaks, output_stray) =
            spectrum::partition_peaks(&output_spectrum, sys, self.target)?;
        for (stage, stray) in [("input", &input_stray), ("output", &output_stray)] {
            for p in stray.iter() {
                failures.push(format!(
                    "{stage} spectrum: unassignable peak at {:.3} Hz",
                    p.center_hz
                ));
            }
        }

        let expected_lines = 1usize << nc;
        for (stage, peaks) in [("input", &input_peaks), ("output", &output_peaks)] {
            let mut patterns: Vec<_> = peaks.iter().map(|p| p.pattern.clone()).collect();
            patterns.sort();
            patterns.dedup();
            if peaks.len() != expected_lines || patterns.len() != expected_lines {
                failures.push(format!(
                    "{stage} spectrum: {} peaks over {} patterns, expected {expected_lines}",
                    peaks.len(),
                    patterns.len()
                ));
            }
        }

        // Heights scale as population differences; fit the scale on the input.
        let diffs = |rho: &DensityMatrix| -> Result<BTreeMap<ControlPattern, f64>> {
            ControlPattern::all(sys.n_spins() - 1)
                .map(|p| states::population_difference(rho, sys, self.target, &p).map(|d| (p, d)))
                .collect()
        };
        let d_in = diffs(&rho_in)?;
        let d_ideal = diffs(&rho_ideal)?;
        let (num, den) = input_peaks.iter().fold((0.0, 0.0), |(n, d), p| {
            let x = d_in[&p.pattern];
            (n + p.height * x, d + x * x)
        });
        let scale = if den > 0.0 { num / den } else { 0.0 };

        let _ = writeln!(report, "lines:");
        for (pattern, line_hz) in sys.target_lines(self.target)? {
            let h_in = input_peaks
                .iter()
                .find(|p| p.pattern == pattern)
                .map(|p| p.height);
            let h_out = output_peaks
                .iter()
                .find(|p| p.pattern == pattern)
                .map(|p| p.height);
            let predicted = scale * d_ideal[&pattern];
            let _ = writeln!(
                report,
                "  pattern={pattern} line_hz={line_hz:.6} input={} output={} predicted={predicted:.6e}",
                fmt_height(h_in),
                fmt_height(h_out)
            );
            if let (Some(h_in), Some(h_out)) = (h_in, h_out) {
                if (h_out - predicted).abs() > self.height_tolerance * h_in.abs() {
                    failures.push(format!(
                        "line {pattern}: output height {h_out:.6e} differs from ideal prediction {predicted:.6e}"
                    ));
                }
            }
        }

        let status = if failures.is_empty() {
            Status::Passed
        } else {
            Status::Failed
        };
        for f in &failures {
            let _ = writeln!(report, "check_failed: {f}");
        }
        let _ = writeln!(
            report,
            "status={}",
            if status == Status::Passed {
                "PASSED"
            } else {
                "FAILED"
            }
        );

        files.insert("input_spectrum.csv".to_string(), input_spectrum.to_csv());
        files.insert("output_spectrum.csv".to_string(), output_spectrum.to_csv());
        files.insert(
            "input_peaks.csv".to_string(),
            spectrum::peaks_to_text(&input_peaks),
        );
        files.insert(
            "output_peaks.csv".to_string(),
            spectrum::peaks_to_text(&output_peaks),
        );
        files.insert("report.txt".to_string(), report);

        Ok(RunReport {
            status,
            files,
            input_spectrum,
            output_spectrum,
            input_peaks,
            output_peaks,
            fidelity_raw,
            fidelity_phase_stripped,
            failures,
        })
    }

    pub fn scan(&self, amplitudes_hz: &[f64]) -> Result<Vec<pulse::ScanPoint>> {
        pulse::selectivity_scan(&self.system, &self.pulse, amplitudes_hz)
    }
}

fn fmt_height(h: Option<f64>) -> String {
    h.map_or_else(|| "missing".to_string(), |v| format!("{v:.6e}"))
}

pub fn scan_to_csv(points: &[pulse::ScanPoint]) -> String {
    let mut out = String::from("amplitude_hz,fidelity_raw,fidelity_phase_stripped\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{:.9},{:.9}",
            p.amplitude_hz, p.fidelity_raw, p.fidelity_phase_stripped
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: String,
    pub system: SpinSystem,
}

pub fn list_presets() -> Result<Vec<PresetInfo>> {
    PRESETS
        .iter()
        .map(|p| {
            let file: SystemFile =
                toml::from_str(p.source).map_err(|e| Error::config(p.name, e.to_string()))?;
            let description = file.description.clone().unwrap_or_default();
            Ok(PresetInfo {
                name: p.name,
                description,
                system: file.build()?,
            })
        })
        .collect()
}

pub fn describe_presets() -> Result<String> {
    let mut out = String::new();
    for p in list_presets()? {
        let s = &p.system;
        let _ = writeln!(out, "{}: {}", p.name, p.description);
        for k in 0..s.n_spins() {
            let _ = writeln!(
                out,
                "  spin {}: offset_hz={} larmor_hz={}",
                k + 1,
                s.offsets_hz()[k],
                s.larmor_hz()[k]
            );
        }
        for k in 0..s.n_spins() {
            for m in 0..k {
                let _ = writeln!(out, "  J{}{}_hz={}", m + 1, k + 1, s.coupling_hz(m, k));
            }
        }
    }
    Ok(out)
}

/// Gate list plus a one-line verdict, e.g. `5 two-qubit gates, fidelity 1.000000`.
pub fn describe_decomposition(n_controls: usize) -> Result<String> {
    let seq = compiler::decompose(n_controls)?;
    let u = compiler::sequence_unitary(&seq)?;
    let f = gates::gate_fidelity(&gates::lambda_not(n_controls), &u)?;
    let mut out = seq.to_text();
    let _ = writeln!(
        out,
        "{} two-qubit gates, fidelity {f:.6}",
        seq.two_qubit_count()
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[system]
preset = "chlorostyrene3"

[gate]
controls = [1, 2]
target = 3
realization = "ideal"
"#;

    #[test]
    fn config_errors_carry_paths() {
        let bad = BASE.replace("target = 3", "target = 7");
        let err = ExperimentConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "gate.target"),
            "{err}"
        );

        let bad = BASE.replace("realization = \"ideal\"", "realization = \"magic\"");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "gate.realization"),
            "{err}"
        );

        let bad = BASE.replace("target = 3", "target = 3\ncolour = 1");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "gate.colour"),
            "{err}"
        );

        let bad = format!("{BASE}\n[pulse]\nshape = \"square\"\n");
        let err = ExperimentConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "pulse.shape"));

        let bad = BASE.replace("controls = [1, 2]", "controls = [1]");
        assert!(ExperimentConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .is_err());

        let bad = BASE.replace("preset = \"chlorostyrene3\"", "preset = \"benzene\"");
        let err = ExperimentConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "system.preset"));
    }

    #[test]
    fn decomposed_needs_two_or_three_controls() {
        let cfg = r#"
[system]
n = 2
offsets_hz = [-500.0, 0.0]
couplings_hz = [[0.0, 10.0], [10.0, 0.0]]

[gate]
controls = [1]
target = 2
realization = "decomposed"
"#;
        let err = ExperimentConfig::from_toml(cfg)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "gate.realization"));
    }

    #[test]
    fn single_pulse_needs_coupled_controls() {
        let cfg = r#"
[system]
preset = "alanine4"

[gate]
controls = [1, 3, 4]
target = 2
realization = "single_pulse"
"#;
        assert!(ExperimentConfig::from_toml(cfg).unwrap().resolve().is_err());
    }

    #[test]
    fn ideal_run_passes() {
        let exp = ExperimentConfig::from_toml(BASE)
            .unwrap()
            .resolve()
            .unwrap();
        let report = exp.run().unwrap();
        assert_eq!(report.status, Status::Passed, "{}", report.summary());
        assert_eq!(report.input_peaks.len(), 4);
    }

    #[test]
    fn presets_listing() {
        let presets = list_presets().unwrap();
        assert_eq!(presets.len(), 2);
        let text = describe_presets().unwrap();
        assert!(text.contains("53.92"));
        assert!(text.contains("J23_hz=17.6"));
    }

    #[test]
    fn decomposition_verdicts() {
        assert!(describe_decomposition(2)
            .unwrap()
            .ends_with("5 two-qubit gates, fidelity 1.000000\n"));
        assert!(describe_decomposition(3)
            .unwrap()
            .ends_with("13 two-qubit gates, fidelity 1.000000\n"));
        assert!(describe_decomposition(1).is_err());
    }
}
