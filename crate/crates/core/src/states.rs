//! Density matrices: thermal equilibrium, the high-temperature deviation,
//! unitary evolution and population readout.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{UnitaryGate, UNITARY_TOL};
use crate::linalg::{self, CMatrix};
use crate::spin_system::{ControlPattern, SpinSystem};

/// Default `hbar omega_ref / k_B T`, the order of room-temperature nuclear
/// polarization.
pub const DEFAULT_BETA_SCALE: f64 = 1e-5;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = -1e-9;

/// Hermitian, unit-trace, positive semidefinite matrix over the
/// lexicographic basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "density matrix of size {}x{}",
                d,
                m.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = linalg::trace(&m);
        if (tr - Complex64::from(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min_ev = linalg::hermitian_eigenvalues(&m)[0];
        if min_ev < EIGEN_FLOOR {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(n_spins: usize) -> Self {
        let d = 1usize << n_spins;
        DensityMatrix(linalg::identity(d) * Complex64::from(1.0 / d as f64))
    }

    pub fn pure_basis(n_spins: usize, idx: usize) -> Result<Self> {
        let d = 1usize << n_spins;
        if idx >= d {
            return Err(Error::OutOfRange(format!(
                "basis index {idx} for {n_spins} spins"
            )));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(idx, idx)] = Complex64::from(1.0);
        Ok(DensityMatrix(m))
    }

    /// Diagonal state with the given populations (must sum to 1).
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        let diag: Vec<Complex64> = p.iter().map(|&v| v.into()).collect();
        Self::new(linalg::diag(&diag))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_spins(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.0)
    }

    /// Row-major text dump: a `dim <d>` header, then one row per line as
    /// whitespace-separated `re im` pairs.
    pub fn to_text(&self) -> String {
        let d = self.dim();
        let mut out = format!("dim {d}\n");
        for r in 0..d {
            let row: Vec<String> = (0..d)
                .map(|c| format!("{} {}", self.0[(r, c)].re, self.0[(r, c)].im))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let d: usize = header
            .trim()
            .strip_prefix("dim")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(Error::Parse {
                line: hline + 1,
                msg: "expected `dim <d>`".into(),
            })?;
        let mut m = CMatrix::zeros(d, d);
        let mut rows = 0;
        for (lineno, line) in lines {
            if rows == d {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "too many rows".into(),
                });
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: e.to_string(),
                })?;
            if vals.len() != 2 * d {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {} numbers, found {}", 2 * d, vals.len()),
                });
            }
            for c in 0..d {
                m[(rows, c)] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
            }
            rows += 1;
        }
        if rows != d {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {d} rows, found {rows}"),
            });
        }
        Self::new(m)
    }
}

/// Traceless Hermitian `Delta` with `rho ~ (I + Delta) / 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMatrix(CMatrix);

impl DeviationMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `(I + Delta) / d` as a density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let d = self.0.nrows();
        DensityMatrix::new((linalg::identity(d) + &self.0) * Complex64::from(1.0 / d as f64))
    }
}

/// Dimensionless energies `beta_scale * E_k / omega_ref`, with `E_k` the
/// lab-frame energies and `omega_ref` the largest lab angular frequency, so
/// `beta_scale` plays the role of `hbar omega_ref / k_B T`.
fn reduced_energies(system: &SpinSystem, beta_scale: f64) -> Result<Vec<f64>> {
    if !(beta_scale > 0.0) || !beta_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "inverse-temperature scale must be positive, got {beta_scale}"
        )));
    }
    let omega_ref = system
        .lab_frequencies_hz()
        .iter()
        .map(|f| (2.0 * std::f64::consts::PI * f).abs())
        .fold(0.0, f64::max);
    let energies = system.lab_energies();
    if omega_ref == 0.0 {
        return Ok(vec![0.0; energies.len()]);
    }
    Ok(energies
        .iter()
        .map(|e| beta_scale * e / omega_ref)
        .collect())
}

/// Boltzmann state `exp(-beta H) / Z`, diagonal in the computational basis.
pub fn thermal_state(system: &SpinSystem, beta_scale: f64) -> Result<DensityMatrix> {
    let eps = reduced_energies(system, beta_scale)?;
    let floor = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eps.iter().map(|e| (-(e - floor)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<Complex64> = weights.iter().map(|w| (w / z).into()).collect();
    Ok(DensityMatrix(linalg::diag(&diag)))
}

/// First-order high-temperature deviation `-beta (H - tr(H)/d)`.
pub fn deviation_state(system: &SpinSystem, beta_scale: f64) -> Result<DeviationMatrix> {
    let eps = reduced_energies(system, beta_scale)?;
    let mean = eps.iter().sum::<f64>() / eps.len() as f64;
    let diag: Vec<Complex64> = eps.iter().map(|e| (-(e - mean)).into()).collect();
    Ok(DeviationMatrix(linalg::diag(&diag)))
}

/// `U rho U^dag`.
pub fn apply_gate(rho: &DensityMatrix, u: &UnitaryGate) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} gate on a {}x{} density matrix",
            u.dim(),
            u.dim(),
            rho.dim(),
            rho.dim()
        )));
    }
    let err = u.unitarity_error();
    if err > UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    Ok(evolve(rho, u.matrix()))
}

pub(crate) fn evolve(rho: &DensityMatrix, u: &CMatrix) -> DensityMatrix {
    let mut m = u * rho.matrix() * u.adjoint();
    // re-symmetrise so round-off never accumulates into a non-Hermitian state
    let mt = m.adjoint();
    m = (m + mt) * Complex64::from(0.5);
    DensityMatrix(m)
}

pub fn populations(rho: &DensityMatrix) -> Vec<f64> {
    rho.matrix().diagonal().iter().map(|z| z.re).collect()
}

/// `p(controls, target=0) - p(controls, target=1)`, proportional to the
/// intensity of that line.
pub fn population_difference(
    rho: &DensityMatrix,
    system: &SpinSystem,
    target: usize,
    controls: &ControlPattern,
) -> Result<f64> {
    if rho.dim() != system.dim() {
        return Err(Error::Dimension(
            "density matrix does not match the register".into(),
        ));
    }
    let (a, b) = system.transition_pair(target, controls)?;
    let m = rho.matrix();
    Ok(m[(a, a)].re - m[(b, b)].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{embed, lambda_not, pauli_x};

    fn chloro() -> SpinSystem {
        SpinSystem::preset("chlorostyrene3").unwrap()
    }

    // Direct Boltzmann evaluation without the shifted-exponent route.
    fn boltzmann_oracle(system: &SpinSystem, beta: f64) -> Vec<f64> {
        let lab = system.lab_frequencies_hz();
        let wref = lab
            .iter()
            .map(|f| 2.0 * std::f64::consts::PI * f.abs())
            .fold(0.0, f64::max);
        let w: Vec<f64> = system
            .lab_energies()
            .iter()
            .map(|e| (-beta * e / wref).exp())
            .collect();
        let z: f64 = w.iter().sum();
        w.iter().map(|x| x / z).collect()
    }

    #[test]
    fn thermal_limits() {
        let s = SpinSystem::new(vec![100.0], vec![vec![0.0]]).unwrap();
        let hot = thermal_state(&s, 1e-14).unwrap();
        assert!(
            linalg::max_abs_diff(hot.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-13
        );
        let cold = thermal_state(&s, 1e3).unwrap();
        assert!(
            linalg::max_abs_diff(
                cold.matrix(),
                DensityMatrix::pure_basis(1, 0).unwrap().matrix()
            ) < 1e-12
        );
        assert!(thermal_state(&s, 0.0).is_err());
        assert!(thermal_state(&s, -1.0).is_err());
    }

    #[test]
    fn thermal_matches_boltzmann_oracle() {
        let s = chloro();
        let rho = thermal_state(&s, DEFAULT_BETA_SCALE).unwrap();
        let p = populations(&rho);
        let oracle = boltzmann_oracle(&s, DEFAULT_BETA_SCALE);
        for (a, b) in p.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let e = s.lab_energies();
        for i in 0..p.len() {
            for j in 0..p.len() {
                if e[i] < e[j] {
                    assert!(p[i] > p[j]);
                }
            }
        }
        assert!(p.iter().all(|&x| x <= p[0]));
    }

    #[test]
    fn deviation_is_traceless_and_linearizes() {
        for name in ["chlorostyrene3", "alanine4"] {
            let s = SpinSystem::preset(name).unwrap();
            let dev = deviation_state(&s, DEFAULT_BETA_SCALE).unwrap();
            let scale = dev.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(linalg::trace(dev.matrix()).norm() < 1e-12 * scale);
        }
        let s1 = SpinSystem::new(vec![0.0], vec![vec![0.0]]).unwrap();
        let d1 = deviation_state(&s1, 1e-5).unwrap();
        // proportional to sigma_z
        let m = d1.matrix();
        assert!(
            m[(0, 1)].norm() == 0.0 && (m[(0, 0)] + m[(1, 1)]).norm() < 1e-20 && m[(0, 0)].re > 0.0
        );
    }

    #[test]
    fn identity_and_involution() {
        let s = chloro();
        let rho = thermal_state(&s, DEFAULT_BETA_SCALE).unwrap();
        let same = apply_gate(&rho, &UnitaryGate::identity(3)).unwrap();
        assert!(linalg::max_abs_diff(same.matrix(), rho.matrix()) < 1e-16);
        let x = embed(&pauli_x(), &[1], 3).unwrap();
        let twice = apply_gate(&apply_gate(&rho, &x).unwrap(), &x).unwrap();
        assert!(linalg::max_abs_diff(twice.matrix(), rho.matrix()) < 1e-16);
    }

    #[test]
    fn toffoli_swaps_last_populations() {
        let p: Vec<f64> = (1..=8).map(|i| i as f64 / 36.0).collect();
        let rho = DensityMatrix::from_populations(&p).unwrap();
        let out = populations(&apply_gate(&rho, &lambda_not(2)).unwrap());
        let mut expected = p.clone();
        expected.swap(6, 7);
        for (a, b) in out.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn population_differences() {
        let s = chloro();
        let mixed = DensityMatrix::maximally_mixed(3);
        let thermal = thermal_state(&s, DEFAULT_BETA_SCALE).unwrap();
        let after = apply_gate(&thermal, &lambda_not(2)).unwrap();
        for pat in ControlPattern::all(2) {
            assert_eq!(population_difference(&mixed, &s, 2, &pat).unwrap(), 0.0);
            let before = population_difference(&thermal, &s, 2, &pat).unwrap();
            assert!(before > 0.0);
            let now = population_difference(&after, &s, 2, &pat).unwrap();
            if pat.to_string() == "11" {
                assert!((now + before).abs() < 1e-15);
            } else {
                assert_eq!(now, before);
            }
        }
        assert!(population_difference(&thermal, &s, 2, &"1".parse().unwrap()).is_err());
    }

    #[test]
    fn pure_state_populations() {
        let p = populations(&DensityMatrix::pure_basis(2, 0).unwrap());
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0]);
        let mixed = populations(&DensityMatrix::maximally_mixed(2));
        assert!(mixed.iter().all(|&x| x == 0.25));
    }

    #[test]
    fn rejects_invalid_density() {
        let mut m = linalg::identity(2) * Complex64::from(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::from_populations(&[1.5, -0.5]).is_err());
        assert!(DensityMatrix::from_populations(&[0.6, 0.6]).is_err());
        let rho = DensityMatrix::maximally_mixed(1);
        assert!(apply_gate(&rho, &lambda_not(1)).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let s = chloro();
        let rho = apply_gate(
            &thermal_state(&s, DEFAULT_BETA_SCALE).unwrap(),
            &embed(&crate::gates::rotation(crate::gates::Axis::Y, 0.4), &[2], 3).unwrap(),
        )
        .unwrap();
        let back = DensityMatrix::from_text(&rho.to_text()).unwrap();
        assert_eq!(back, rho);
        assert!(DensityMatrix::from_text("dim 2\n1 0 0 0\n").is_err());
        assert!(DensityMatrix::from_text("nope").is_err());
    }
}
