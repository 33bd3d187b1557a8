//! Simulator for liquid-state NMR quantum registers.
//!
//! Multi-controlled NOT gates `Lambda_n(not)` are realised three ways: as
//! exact unitaries, as networks of two-qubit gates, and as a single
//! transition-selective pi pulse propagated under the weak-coupling
//! Hamiltonian. Spectra of one spin before and after a gate are synthesised
//! from the density matrix, so the outcome reads the way a spectrometer
//! would show it: one line per control pattern, the flipped pattern
//! inverted.
//!
//! Spins are 0-based throughout the library API. Config files, text formats
//! and the command line use 1-based spin labels.

pub mod compiler;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod linalg;
pub mod pulse;
pub mod spectrum;
pub mod spin_system;
pub mod states;

pub use error::{Error, Result};
pub use gates::UnitaryGate;
pub use pulse::{PulseProgram, Shape};
pub use spin_system::{BasisIndex, ControlPattern, SpinSystem};
pub use states::DensityMatrix;
