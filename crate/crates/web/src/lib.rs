//! Browser bindings: gate runs with before/after spectra, selectivity
//! curves and two-qubit decompositions.

use nmrgate::compiler::{Amplitude, LambdaPulseSpec};
use nmrgate::experiment::{self, ExperimentConfig, Status};
use nmrgate::{pulse, Shape, SpinSystem};
use wasm_bindgen::prelude::*;

/// Margin around the target multiplet kept for plotting.
const WINDOW_MARGIN_HZ: f64 = 15.0;

fn err(e: nmrgate::Error) -> String {
    e.to_string()
}

/// The last spin is the target, every other spin a control.
fn default_gate(preset: &str) -> Result<(SpinSystem, Vec<usize>, usize), String> {
    let sys = SpinSystem::preset(preset).map_err(err)?;
    let n = sys.n_spins();
    Ok((sys, (0..n - 1).collect(), n - 1))
}

#[wasm_bindgen]
pub struct GateRun {
    frequencies: Vec<f64>,
    before: Vec<f64>,
    after: Vec<f64>,
    fidelity: f64,
    passed: bool,
    report: String,
}

#[wasm_bindgen]
impl GateRun {
    pub fn frequencies(&self) -> Vec<f64> {
        self.frequencies.clone()
    }
    pub fn before(&self) -> Vec<f64> {
        self.before.clone()
    }
    pub fn after(&self) -> Vec<f64> {
        self.after.clone()
    }
    /// Phase-stripped fidelity of the pulse against the modified gate.
    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }
    pub fn passed(&self) -> bool {
        self.passed
    }
    pub fn report(&self) -> String {
        self.report.clone()
    }
}

/// Single selective pulse on a preset, spectra of the target before and after.
#[wasm_bindgen]
pub fn run_gate(
    preset: &str,
    shape: &str,
    amplitude_rel_jmin: f64,
    line_broadening_hz: f64,
) -> Result<GateRun, String> {
    let (sys, controls, target) = default_gate(preset)?;
    let list = |v: &[usize]| {
        v.iter()
            .map(|c| (c + 1).to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let text = format!(
        "[system]\npreset = \"{preset}\"\n\n[gate]\ncontrols = [{}]\ntarget = {}\nrealization = \"single_pulse\"\n\n\
         [pulse]\namplitude_rel_jmin = {amplitude_rel_jmin:?}\nshape = \"{shape}\"\n\n[acquisition]\nline_broadening_hz = {line_broadening_hz:?}\n",
        list(&controls),
        target + 1
    );
    let report = ExperimentConfig::from_toml(&text)
        .and_then(|c| c.resolve())
        .and_then(|e| e.run())
        .map_err(err)?;

    let lines = sys.target_lines(target).map_err(err)?;
    let lo = lines.iter().map(|l| l.1).fold(f64::INFINITY, f64::min) - WINDOW_MARGIN_HZ;
    let hi = lines.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max) + WINDOW_MARGIN_HZ;
    let keep: Vec<usize> = report
        .input_spectrum
        .frequencies_hz
        .iter()
        .enumerate()
        .filter(|(_, f)| (lo..=hi).contains(*f))
        .map(|(i, _)| i)
        .collect();
    let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
    Ok(GateRun {
        frequencies: pick(&report.input_spectrum.frequencies_hz),
        before: pick(&report.input_spectrum.amplitudes),
        after: pick(&report.output_spectrum.amplitudes),
        fidelity: report.fidelity_phase_stripped,
        passed: report.status == Status::Passed,
        report: report.summary().to_string(),
    })
}

/// Phase-stripped pulse fidelity at each amplitude (in units of the
/// smallest target coupling), in the order given.
#[wasm_bindgen]
pub fn selectivity_curve(
    preset: &str,
    shape: &str,
    amplitudes_rel_jmin: Vec<f64>,
) -> Result<Vec<f64>, String> {
    let (sys, controls, target) = default_gate(preset)?;
    let shape: Shape = shape.parse().map_err(err)?;
    let spec = LambdaPulseSpec {
        amplitude: Amplitude::default(),
        shape,
        ..LambdaPulseSpec::new(controls, target)
    };
    let jmin = spec.min_coupling_hz(&sys);
    amplitudes_rel_jmin
        .iter()
        .map(|r| {
            if !(*r > 0.0) {
                return Err(format!("amplitude must be positive, got {r}"));
            }
            let points = pulse::selectivity_scan(&sys, &spec, &[r * jmin]).map_err(err)?;
            Ok(points[0].fidelity_phase_stripped)
        })
        .collect()
}

/// Gate list and verdict for the two-qubit network of `Lambda_n(not)`.
#[wasm_bindgen]
pub fn decomposition(n_controls: usize) -> Result<String, String> {
    experiment::describe_decomposition(n_controls).map_err(err)
}

#[wasm_bindgen]
pub fn presets() -> Result<String, String> {
    experiment::describe_presets().map_err(err)
}
