//! Weak-coupling spin register: offsets, scalar couplings, the secular
//! Hamiltonian and its single-quantum transitions.
//!
//! Units: offsets and couplings are stored in Hz; Hamiltonians and energies
//! are returned in rad/s with hbar = 1. Basis index bit `n-1-k` holds spin
//! `k` (spin 0 is the most significant bit), so index order is lexicographic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Spectrometer reference used when a system does not state one.
pub const DEFAULT_LARMOR_HZ: f64 = 500.0e6;

/// Tolerance when checking coupling-matrix symmetry.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    offsets_hz: Vec<f64>,
    couplings_hz: Vec<Vec<f64>>,
    larmor_hz: Vec<f64>,
    weakly_coupled: bool,
}

impl SpinSystem {
    /// Validates offsets and the coupling matrix. A register whose largest
    /// coupling is not below the smallest adjacent offset gap is accepted but
    /// flagged through [`SpinSystem::is_weakly_coupled`].
    pub fn new(offsets_hz: Vec<f64>, couplings_hz: Vec<Vec<f64>>) -> Result<Self> {
        let n = offsets_hz.len();
        Self::with_larmor(offsets_hz, couplings_hz, vec![DEFAULT_LARMOR_HZ; n])
    }

    pub fn with_larmor(
        offsets_hz: Vec<f64>,
        couplings_hz: Vec<Vec<f64>>,
        larmor_hz: Vec<f64>,
    ) -> Result<Self> {
        let n = offsets_hz.len();
        if n == 0 {
            return Err(Error::Dimension(
                "a register needs at least one spin".into(),
            ));
        }
        if couplings_hz.len() != n || couplings_hz.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!(
                "couplings must be {n}x{n} to match {n} offsets"
            )));
        }
        if larmor_hz.len() != n {
            return Err(Error::Dimension(format!(
                "{} larmor frequencies for {n} spins",
                larmor_hz.len()
            )));
        }
        if offsets_hz
            .iter()
            .chain(larmor_hz.iter())
            .any(|v| !v.is_finite())
            || couplings_hz.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite frequency".into()));
        }
        for k in 0..n {
            if couplings_hz[k][k] != 0.0 {
                return Err(Error::NonzeroSelfCoupling(k));
            }
            for m in 0..k {
                if (couplings_hz[k][m] - couplings_hz[m][k]).abs() > SYMMETRY_TOL {
                    return Err(Error::AsymmetricCouplings(m, k));
                }
            }
        }
        for k in 1..n {
            if offsets_hz[k] <= offsets_hz[k - 1] {
                return Err(Error::OffsetsNotIncreasing(k));
            }
        }

        let max_j = couplings_hz
            .iter()
            .flatten()
            .fold(0.0f64, |a, j| a.max(j.abs()));
        let min_gap = offsets_hz
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let weakly_coupled = max_j < min_gap;
        if !weakly_coupled {
            log::warn!("weak-coupling assumption violated: max |J| = {max_j} Hz, min offset gap = {min_gap} Hz");
        }

        Ok(SpinSystem {
            offsets_hz,
            couplings_hz,
            larmor_hz,
            weakly_coupled,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.offsets_hz.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins()
    }

    pub fn offsets_hz(&self) -> &[f64] {
        &self.offsets_hz
    }

    pub fn larmor_hz(&self) -> &[f64] {
        &self.larmor_hz
    }

    pub fn coupling_hz(&self, a: usize, b: usize) -> f64 {
        self.couplings_hz[a][b]
    }

    pub fn couplings_hz(&self) -> &[Vec<f64>] {
        &self.couplings_hz
    }

    pub fn is_weakly_coupled(&self) -> bool {
        self.weakly_coupled
    }

    /// Same couplings, every offset shifted by `larmor_hz`. Used for
    /// Boltzmann weights, where the rotating-frame offsets alone would give
    /// the reference spin no polarization.
    pub(crate) fn lab_frequencies_hz(&self) -> Vec<f64> {
        self.offsets_hz
            .iter()
            .zip(&self.larmor_hz)
            .map(|(o, l)| o + l)
            .collect()
    }

    /// `z` eigenvalue (+1 for |0>, -1 for |1>) of spin `k` in basis state `idx`.
    pub fn z_sign(&self, idx: usize, k: usize) -> f64 {
        if idx >> (self.n_spins() - 1 - k) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Energies of all basis states: the diagonal of the weak-coupling
    /// Hamiltonian `H = -1/2 [sum_k w_k sz_k + pi sum_{k>m} J_mk sz_m sz_k]`.
    pub fn energies(&self) -> Vec<f64> {
        energies_for(self, &self.offsets_hz)
    }

    pub(crate) fn lab_energies(&self) -> Vec<f64> {
        energies_for(self, &self.lab_frequencies_hz())
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let e: Vec<_> = self.energies().into_iter().map(|v| v.into()).collect();
        linalg::diag(&e)
    }

    pub fn basis_energy(&self, idx: BasisIndex) -> Result<f64> {
        self.check_index(idx)?;
        Ok(energies_for_state(self, &self.offsets_hz, idx.0))
    }

    pub fn check_index(&self, idx: BasisIndex) -> Result<()> {
        if idx.0 >= self.dim() {
            return Err(Error::OutOfRange(format!(
                "basis index {} for a {}-spin register",
                idx.0,
                self.n_spins()
            )));
        }
        Ok(())
    }

    pub fn check_spin(&self, k: usize) -> Result<()> {
        if k >= self.n_spins() {
            return Err(Error::OutOfRange(format!(
                "spin {k} in a {}-spin register",
                self.n_spins()
            )));
        }
        Ok(())
    }

    /// Basis indices `(a, b)` of the transition in which only `target`
    /// flips: `a` has the target in |0>, `b` in |1>. The pattern gives the
    /// other spins in ascending spin order.
    pub fn transition_pair(
        &self,
        target: usize,
        controls: &ControlPattern,
    ) -> Result<(usize, usize)> {
        self.check_spin(target)?;
        let n = self.n_spins();
        if controls.len() != n - 1 {
            return Err(Error::InvalidPattern(format!(
                "pattern `{controls}` has {} bits, expected {}",
                controls.len(),
                n - 1
            )));
        }
        let mut a = 0usize;
        let mut bits = controls.bits().iter();
        for k in (0..n).filter(|&k| k != target) {
            if *bits.next().expect("length checked") {
                a |= 1 << (n - 1 - k);
            }
        }
        Ok((a, a | 1 << (n - 1 - target)))
    }

    /// Frequency in Hz of the single-quantum line of `target` with the other
    /// spins fixed by `controls`: `(E[target=0] - E[target=1]) / 2pi`.
    /// This is the frequency at which the circularly polarised drive is
    /// resonant and at which the sigma+ signal precesses; each control bit
    /// set to 1 contributes `+J/2`, each bit at 0 contributes `-J/2`.
    pub fn transition_frequency(&self, target: usize, controls: &ControlPattern) -> Result<f64> {
        let (a, b) = self.transition_pair(target, controls)?;
        let e = |i| energies_for_state(self, &self.offsets_hz, i);
        Ok((e(a) - e(b)) / (2.0 * PI))
    }

    /// All `2^(n-1)` lines of `target`, keyed by control pattern, in
    /// ascending pattern order.
    pub fn target_lines(&self, target: usize) -> Result<Vec<(ControlPattern, f64)>> {
        self.check_spin(target)?;
        ControlPattern::all(self.n_spins() - 1)
            .map(|p| self.transition_frequency(target, &p).map(|f| (p, f)))
            .collect()
    }

    /// Centre of the `target` multiplet, where a spin-selective pulse goes.
    pub fn multiplet_center_hz(&self, target: usize) -> Result<f64> {
        let lines = self.target_lines(target)?;
        Ok(lines.iter().map(|(_, f)| f).sum::<f64>() / lines.len() as f64)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SystemFile =
            toml::from_str(text).map_err(|e| Error::config("system", e.to_string()))?;
        cfg.build()
    }

    pub fn preset(name: &str) -> Result<Self> {
        let preset = PRESETS
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
        Self::from_toml(preset.source)
    }
}

fn energies_for(system: &SpinSystem, freqs_hz: &[f64]) -> Vec<f64> {
    (0..system.dim())
        .map(|i| energies_for_state(system, freqs_hz, i))
        .collect()
}

fn energies_for_state(system: &SpinSystem, freqs_hz: &[f64], idx: usize) -> f64 {
    let n = system.n_spins();
    let mut zeeman = 0.0;
    let mut coupling = 0.0;
    for k in 0..n {
        let zk = system.z_sign(idx, k);
        zeeman += 2.0 * PI * freqs_hz[k] * zk;
        for m in 0..k {
            coupling += system.couplings_hz[m][k] * system.z_sign(idx, m) * zk;
        }
    }
    -0.5 * (zeeman + PI * coupling)
}

/// Index into the lexicographic computational basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub usize);

/// Definite bit assignment for the non-target spins, in ascending spin order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlPattern(Vec<bool>);

impl ControlPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        ControlPattern(bits)
    }

    pub fn all_ones(len: usize) -> Self {
        ControlPattern(vec![true; len])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every pattern of `len` bits, counting up from 0...0.
    pub fn all(len: usize) -> impl Iterator<Item = ControlPattern> {
        (0..1usize << len)
            .map(move |v| ControlPattern((0..len).map(|i| v >> (len - 1 - i) & 1 == 1).collect()))
    }
}

impl fmt::Display for ControlPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ControlPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidPattern(format!("`{s}` is not a bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ControlPattern)
    }
}

/// On-disk description of a register (`n`, `offsets_hz`, `couplings_hz`,
/// optional `larmor_hz`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub n: usize,
    pub offsets_hz: Vec<f64>,
    pub couplings_hz: Vec<Vec<f64>>,
    #[serde(default)]
    pub larmor_hz: Option<Vec<f64>>,
}

impl SystemFile {
    pub fn build(self) -> Result<SpinSystem> {
        if self.n != self.offsets_hz.len() {
            return Err(Error::config(
                "offsets_hz",
                format!("{} offsets for n = {}", self.offsets_hz.len(), self.n),
            ));
        }
        let larmor = self
            .larmor_hz
            .unwrap_or_else(|| vec![DEFAULT_LARMOR_HZ; self.n]);
        SpinSystem::with_larmor(self.offsets_hz, self.couplings_hz, larmor)
    }
}

pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "chlorostyrene3",
        source: include_str!("../presets/chlorostyrene3.toml"),
    },
    Preset {
        name: "alanine4",
        source: include_str!("../presets/alanine4.toml"),
    },
];
