//! Observation of one spin: ideal readout pulse, FID synthesis from the
//! diagonal Hamiltonian, Fourier transform and peak assignment.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::gates::{self, Axis};
use crate::spin_system::{ControlPattern, SpinSystem};
use crate::states::{self, DensityMatrix};

/// Peaks must exceed this multiple of the median |amplitude|.
pub const NOISE_FLOOR_FACTOR: f64 = 5.0;
/// and this fraction of the tallest |amplitude|.
pub const RELATIVE_FLOOR: f64 = 0.02;
/// Maximum peak-to-line distance, in bins, for an assignment.
pub const ASSIGN_BINS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionParams {
    pub dwell_s: f64,
    pub points: usize,
    pub line_broadening_hz: f64,
}

impl Default for AcquisitionParams {
    /// 4 kHz spectral width, 16384 points (bin ~0.24 Hz), 0.5 Hz broadening.
    fn default() -> Self {
        AcquisitionParams {
            dwell_s: 250e-6,
            points: 16384,
            line_broadening_hz: 0.5,
        }
    }
}

impl AcquisitionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dwell_s > 0.0) || !self.dwell_s.is_finite() {
            return Err(Error::InvalidParameter("dwell must be positive".into()));
        }
        if self.points < 1024 || !self.points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "points must be a power of two >= 1024, got {}",
                self.points
            )));
        }
        if !(self.line_broadening_hz >= 0.0) || !self.line_broadening_hz.is_finite() {
            return Err(Error::InvalidParameter(
                "line broadening must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn bin_hz(&self) -> f64 {
        1.0 / (self.dwell_s * self.points as f64)
    }
}

/// Instantaneous pi/2 rotation about y on `target` only.
pub fn readout_prepare(
    rho: &DensityMatrix,
    system: &SpinSystem,
    target: usize,
) -> Result<DensityMatrix> {
    system.check_spin(target)?;
    let r = gates::embed(
        &gates::rotation(Axis::Y, PI / 2.0),
        &[target],
        system.n_spins(),
    )?;
    states::apply_gate(rho, &r)
}

/// `S(t_j) = tr(s+_target rho(t_j)) exp(-pi lb t_j)` with `s+ = |0><1|`,
/// evaluated in closed form per coherence.
pub fn synthesize_fid(
    system: &SpinSystem,
    rho: &DensityMatrix,
    target: usize,
    acq: &AcquisitionParams,
) -> Result<Vec<Complex64>> {
    acq.validate()?;
    if rho.dim() != system.dim() {
        return Err(Error::Dimension(
            "density matrix does not match the register".into(),
        ));
    }
    let energies = system.energies();
    let mut terms = Vec::new();
    for pattern in ControlPattern::all(system.n_spins() - 1) {
        let (a, b) = system.transition_pair(target, &pattern)?;
        let amp = rho.matrix()[(b, a)];
        if amp != Complex64::new(0.0, 0.0) {
            terms.push((amp, energies[a] - energies[b]));
        }
    }
    let decay = PI * acq.line_broadening_hz;
    Ok((0..acq.points)
        .map(|j| {
            let t = j as f64 * acq.dwell_s;
            let sum: Complex64 = terms
                .iter()
                .map(|(amp, w)| amp * Complex64::from_polar(1.0, w * t))
                .sum();
            sum * (-decay * t).exp()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub center_hz: f64,
    /// Signed height of the fitted line.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPeak {
    pub center_hz: f64,
    pub height: f64,
    pub pattern: ControlPattern,
    pub line_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending, uniform.
    pub frequencies_hz: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub bin_hz: f64,
}

/// Real part of the Fourier transform of `fid`, first point halved. Axis
/// runs from `-sw/2` upward in steps of `1/(dwell points)`.
pub fn spectrum_of(fid: &[Complex64], acq: &AcquisitionParams) -> Result<Spectrum> {
    acq.validate()?;
    if fid.len() != acq.points {
        return Err(Error::Dimension(format!(
            "{} FID points, expected {}",
            fid.len(),
            acq.points
        )));
    }
    let n = acq.points;
    let mut buf = fid.to_vec();
    buf[0] *= 0.5;
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = acq.bin_hz();
    let half = n as i64 / 2;
    let (frequencies_hz, amplitudes) = (-half..half)
        .map(|m| {
            let src = m.rem_euclid(n as i64) as usize;
            (m as f64 * bin, buf[src].re * acq.dwell_s)
        })
        .unzip();
    Ok(Spectrum {
        frequencies_hz,
        amplitudes,
        bin_hz: bin,
    })
}

impl Spectrum {
    /// Local maxima of |amplitude| above both noise floors, refined by a
    /// three-point Lorentzian fit (a parabola through `1/|y|`).
    pub fn peaks(&self) -> Vec<Peak> {
        let mags: Vec<f64> = self.amplitudes.iter().map(|a| a.abs()).collect();
        let tallest = mags.iter().copied().fold(0.0, f64::max);
        if tallest == 0.0 {
            return Vec::new();
        }
        let mut sorted = mags.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let threshold = (NOISE_FLOOR_FACTOR * median).max(RELATIVE_FLOOR * tallest);

        let mut out = Vec::new();
        for i in 1..mags.len() - 1 {
            let y = mags[i];
            if y <= threshold || y <= mags[i - 1] || y < mags[i + 1] {
                continue;
            }
            let (offset, height) = lorentzian_vertex(mags[i - 1], y, mags[i + 1]);
            out.push(Peak {
                center_hz: self.frequencies_hz[i] + offset * self.bin_hz,
                height: height.copysign(self.amplitudes[i]),
            });
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency_hz,amplitude\n");
        for (f, a) in self.frequencies_hz.iter().zip(&self.amplitudes) {
            let _ = writeln!(out, "{f},{a}");
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|a| *a == 0.0)
    }
}

fn lorentzian_vertex(left: f64, mid: f64, right: f64) -> (f64, f64) {
    if left > 0.0 && right > 0.0 {
        let (gl, g0, gr) = (1.0 / left, 1.0 / mid, 1.0 / right);
        let a = 0.5 * (gl + gr) - g0;
        let b = 0.5 * (gr - gl);
        if a > 0.0 {
            let x = -b / (2.0 * a);
            let g = g0 - b * b / (4.0 * a);
            if x.abs() < 1.0 && g > 0.0 {
                return (x, 1.0 / g);
            }
        }
    }
    (0.0, mid)
}

/// Match each detected peak to the nearest line of `target`.
pub fn assign_peaks(
    spectrum: &Spectrum,
    system: &SpinSystem,
    target: usize,
) -> Result<Vec<LabeledPeak>> {
    let (assigned, stray) = partition_peaks(spectrum, system, target)?;
    match stray.first() {
        Some(p) => Err(Error::UnassignablePeak {
            center_hz: p.center_hz,
        }),
        None => Ok(assigned),
    }
}

/// Like [`assign_peaks`], but peaks too far from every line are returned
/// separately instead of failing.
pub fn partition_peaks(
    spectrum: &Spectrum,
    system: &SpinSystem,
    target: usize,
) -> Result<(Vec<LabeledPeak>, Vec<Peak>)> {
    let lines = system.target_lines(target)?;
    let mut assigned = Vec::new();
    let mut stray = Vec::new();
    for p in spectrum.peaks() {
        let (pattern, line) = lines
            .iter()
            .min_by(|a, b| {
                (a.1 - p.center_hz)
                    .abs()
                    .total_cmp(&(b.1 - p.center_hz).abs())
            })
            .expect("at least one line");
        if (line - p.center_hz).abs() > ASSIGN_BINS * spectrum.bin_hz {
            stray.push(p);
        } else {
            assigned.push(LabeledPeak {
                center_hz: p.center_hz,
                height: p.height,
                pattern: pattern.clone(),
                line_hz: *line,
            });
        }
    }
    Ok((assigned, stray))
}

/// Peaks in the usual NMR display order, frequency decreasing left to right.
pub fn display_order(peaks: &[LabeledPeak]) -> Vec<LabeledPeak> {
    let mut v = peaks.to_vec();
    v.sort_by(|a, b| b.center_hz.total_cmp(&a.center_hz));
    v
}

pub fn peaks_to_text(peaks: &[LabeledPeak]) -> String {
    let mut out = String::from("center_hz,height,control_pattern\n");
    for p in peaks {
        let _ = writeln!(out, "{:.6},{:.9e},{}", p.center_hz, p.height, p.pattern);
    }
    out
}

/// Readout, FID and spectrum in one step.
pub fn observe(
    system: &SpinSystem,
    rho: &DensityMatrix,
    target: usize,
    acq: &AcquisitionParams,
) -> Result<Spectrum> {
    let read = readout_prepare(rho, system, target)?;
    let fid = synthesize_fid(system, &read, target, acq)?;
    spectrum_of(&fid, acq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{thermal_state, DEFAULT_BETA_SCALE};

    #[test]
    fn acquisition_validation() {
        assert!(AcquisitionParams::default().validate().is_ok());
        assert!((AcquisitionParams::default().bin_hz() - 4000.0 / 16384.0).abs() < 1e-15);
        let bad = AcquisitionParams {
            points: 1000,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AcquisitionParams {
            points: 512,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AcquisitionParams {
            dwell_s: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AcquisitionParams {
            line_broadening_hz: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mixed_state_gives_no_signal() {
        let s = SpinSystem::preset("chlorostyrene3").unwrap();
        let acq = AcquisitionParams::default();
        let rho = DensityMatrix::maximally_mixed(3);
        let read = readout_prepare(&rho, &s, 2).unwrap();
        assert!(crate::linalg::max_abs_diff(read.matrix(), rho.matrix()) < 1e-16);
        let fid = synthesize_fid(&s, &read, 2, &acq).unwrap();
        assert!(fid.iter().all(|z| z.norm() == 0.0));
        let spec = spectrum_of(&fid, &acq).unwrap();
        assert!(spec.is_zero());
        assert!(spec.peaks().is_empty());
    }

    #[test]
    fn single_spin_readout_and_line() {
        let s = SpinSystem::new(vec![37.0], vec![vec![0.0]]).unwrap();
        let acq = AcquisitionParams::default();
        let rho = thermal_state(&s, DEFAULT_BETA_SCALE).unwrap();
        let p = crate::states::populations(&rho);
        let read = readout_prepare(&rho, &s, 0).unwrap();
        assert!((read.matrix()[(1, 0)].re - (p[0] - p[1]) / 2.0).abs() < 1e-18);
        let fid = synthesize_fid(&s, &read, 0, &acq).unwrap();
        // a single complex exponential at the line frequency
        let line = s
            .transition_frequency(0, &ControlPattern::new(vec![]))
            .unwrap();
        let ratio = fid[1] / fid[0];
        let expected = Complex64::from_polar(
            (-PI * 0.5 * acq.dwell_s).exp(),
            2.0 * PI * line * acq.dwell_s,
        );
        assert!((ratio - expected).norm() < 1e-12);
        let spec = spectrum_of(&fid, &acq).unwrap();
        let peaks = spec.peaks();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].center_hz - line).abs() < spec.bin_hz);
        assert!(peaks[0].height > 0.0);
    }

    #[test]
    fn zero_fid_zero_spectrum() {
        let acq = AcquisitionParams::default();
        let spec = spectrum_of(&vec![Complex64::new(0.0, 0.0); acq.points], &acq).unwrap();
        assert!(spec.is_zero());
        assert!(spectrum_of(&[Complex64::new(0.0, 0.0); 3], &acq).is_err());
    }

    #[test]
    fn lorentzian_fit_is_exact_on_samples() {
        let lor = |x: f64| 3.0 / (1.0 + ((x - 0.3) / 0.8).powi(2));
        let (x, h) = lorentzian_vertex(lor(-1.0), lor(0.0), lor(1.0));
        assert!((x - 0.3).abs() < 1e-12 && (h - 3.0).abs() < 1e-12);
    }

    #[test]
    fn axis_is_uniform_ascending() {
        let acq = AcquisitionParams {
            points: 1024,
            ..Default::default()
        };
        let spec = spectrum_of(&vec![Complex64::new(1.0, 0.0); 1024], &acq).unwrap();
        assert_eq!(spec.frequencies_hz[0], -2000.0);
        for w in spec.frequencies_hz.windows(2) {
            assert!((w[1] - w[0] - spec.bin_hz).abs() < 1e-9);
        }
        assert!(spec.to_csv().starts_with("frequency_hz,amplitude\n-2000,"));
    }
}
