//! Ideal gate unitaries, register embedding and fidelity metrics.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, I, ONE, ZERO};

/// Deviation from `U^dag U = I` accepted when wrapping a matrix.
pub const UNITARY_TOL: f64 = 1e-10;

/// Square complex matrix of power-of-two dimension satisfying `U^dag U = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryGate(CMatrix);

impl UnitaryGate {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "gate must be square with power-of-two size, got {}x{}",
                d,
                m.ncols()
            )));
        }
        let err = linalg::unitarity_error(&m);
        if err > tol {
            return Err(Error::NotUnitary(err));
        }
        Ok(UnitaryGate(m))
    }

    /// Wrap a matrix known to be unitary by construction.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert!(linalg::unitarity_error(&m) < 1e-6);
        UnitaryGate(m)
    }

    pub fn identity(n_qubits: usize) -> Self {
        UnitaryGate(linalg::identity(1 << n_qubits))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn adjoint(&self) -> Self {
        UnitaryGate(self.0.adjoint())
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &UnitaryGate) -> Result<Self> {
        if self.dim() != first.dim() {
            return Err(Error::Dimension(format!(
                "cannot compose {}x{} with {}x{}",
                self.dim(),
                self.dim(),
                first.dim(),
                first.dim()
            )));
        }
        Ok(UnitaryGate(&self.0 * &first.0))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(UnitaryGate(linalg::identity(self.dim())), |acc, _| {
            UnitaryGate(&self.0 * &acc.0)
        })
    }

    pub fn unitarity_error(&self) -> f64 {
        linalg::unitarity_error(&self.0)
    }
}

pub fn pauli_x() -> UnitaryGate {
    UnitaryGate(linalg::pauli_x())
}

/// `Lambda_n(not)`: flips the last qubit iff all `n_controls` leading qubits
/// are 1. With zero controls this is plain `sigma_x`.
pub fn lambda_not(n_controls: usize) -> UnitaryGate {
    flip_last_pair(n_controls, ONE)
}

/// The "modified" gate a single transition-selective pi pulse realises:
/// `diag(I, -i sigma_x)`, i.e. `exp(-i pi/2 P (x) sigma_x)` with `P` the
/// projector onto all controls in |1>.
pub fn modified_lambda_not(n_controls: usize) -> Result<UnitaryGate> {
    if n_controls == 0 {
        return Err(Error::InvalidParameter(
            "the modified gate needs at least one control".into(),
        ));
    }
    Ok(flip_last_pair(n_controls, -I))
}

fn flip_last_pair(n_controls: usize, amp: Complex64) -> UnitaryGate {
    let d = 1usize << (n_controls + 1);
    let mut m = linalg::identity(d);
    m[(d - 2, d - 2)] = ZERO;
    m[(d - 1, d - 1)] = ZERO;
    m[(d - 2, d - 1)] = amp;
    m[(d - 1, d - 2)] = amp;
    UnitaryGate(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `exp(-i angle sigma_axis / 2)`.
pub fn rotation(axis: Axis, angle: f64) -> UnitaryGate {
    let sigma = match axis {
        Axis::X => linalg::pauli_x(),
        Axis::Y => linalg::pauli_y(),
        Axis::Z => linalg::pauli_z(),
    };
    let c = Complex64::from((angle / 2.0).cos());
    let s = Complex64::from((angle / 2.0).sin());
    UnitaryGate(linalg::identity(2) * c - sigma * (I * s))
}

/// `exp(-i angle (cos phi sigma_x + sin phi sigma_y) / 2)`: rotation about
/// the transverse axis at azimuth `phi`.
pub fn transverse_rotation(phi: f64, angle: f64) -> UnitaryGate {
    let c = Complex64::from((angle / 2.0).cos());
    let s = (angle / 2.0).sin();
    let off = |sign: f64| -I * s * Complex64::from_polar(1.0, sign * phi);
    UnitaryGate(linalg::from_rows(&[&[c, off(-1.0)], &[off(1.0), c]]))
}

/// Real power of `sigma_x`: `H diag(1, e^{i pi t}) H`. `t = 1/2` is the
/// square root of NOT used by the controlled-root networks.
pub fn x_power(t: f64) -> UnitaryGate {
    let p = Complex64::from_polar(1.0, PI * t);
    let a = (ONE + p) * 0.5;
    let b = (ONE - p) * 0.5;
    UnitaryGate(linalg::from_rows(&[&[a, b], &[b, a]]))
}

/// `diag(I_2, u)` for a one-qubit `u`.
pub fn controlled(u: &UnitaryGate) -> Result<UnitaryGate> {
    if u.dim() != 2 {
        return Err(Error::Dimension(format!(
            "controlled() takes a 2x2 gate, got {}x{}",
            u.dim(),
            u.dim()
        )));
    }
    let mut m = linalg::identity(4);
    m.view_mut((2, 2), (2, 2)).copy_from(u.matrix());
    Ok(UnitaryGate(m))
}

/// Lift `g` onto `wires` of an `n`-qubit register. `wires[i]` is the
/// register qubit playing the role of the gate's qubit `i`; qubit 0 is the
/// most significant bit on both sides.
pub fn embed(g: &UnitaryGate, wires: &[usize], n: usize) -> Result<UnitaryGate> {
    let k = g.n_qubits();
    if wires.len() != k {
        return Err(Error::InvalidWires(format!(
            "{}-qubit gate given {} wires",
            k,
            wires.len()
        )));
    }
    for (i, &w) in wires.iter().enumerate() {
        if w >= n {
            return Err(Error::InvalidWires(format!(
                "wire {w} outside a {n}-qubit register"
            )));
        }
        if wires[..i].contains(&w) {
            return Err(Error::InvalidWires(format!("wire {w} repeated")));
        }
    }

    let d = 1usize << n;
    let shifts: Vec<usize> = wires.iter().map(|&w| n - 1 - w).collect();
    let wire_mask: usize = shifts.iter().map(|s| 1 << s).sum();
    let local = |idx: usize| {
        shifts
            .iter()
            .enumerate()
            .fold(0, |acc, (i, s)| acc | (idx >> s & 1) << (k - 1 - i))
    };
    let scatter = |base: usize, l: usize| {
        shifts
            .iter()
            .enumerate()
            .fold(base, |acc, (i, s)| acc | (l >> (k - 1 - i) & 1) << s)
    };

    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let base = col & !wire_mask;
        let lc = local(col);
        for lr in 0..(1 << k) {
            let v = g.matrix()[(lr, lc)];
            if v != ZERO {
                m[(scatter(base, lr), col)] = v;
            }
        }
    }
    Ok(UnitaryGate(m))
}

/// Global-phase-invariant overlap `|tr(U^dag V)| / d`.
pub fn gate_fidelity(u: &UnitaryGate, v: &UnitaryGate) -> Result<f64> {
    same_dim(u, v)?;
    let t = linalg::trace(&(u.matrix().adjoint() * v.matrix()));
    Ok(t.norm() / u.dim() as f64)
}

/// Fidelity after the best diagonal phase correction of `v`:
/// `max_D |tr(U^dag D V)| / d = sum_i |(V U^dag)_ii| / d`.
pub fn phase_stripped_fidelity(u: &UnitaryGate, v: &UnitaryGate) -> Result<f64> {
    same_dim(u, v)?;
    let prod = v.matrix() * u.matrix().adjoint();
    Ok(prod.diagonal().iter().map(|z| z.norm()).sum::<f64>() / u.dim() as f64)
}

fn same_dim(u: &UnitaryGate, v: &UnitaryGate) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension(format!(
            "fidelity between {}x{} and {}x{}",
            u.dim(),
            u.dim(),
            v.dim(),
            v.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn basis(d: usize, i: usize) -> nalgebra::DVector<Complex64> {
        let mut v = nalgebra::DVector::zeros(d);
        v[i] = ONE;
        v
    }

    fn block_diag_identity_sigma(d: usize, block: [[Complex64; 2]; 2]) -> CMatrix {
        let mut m = linalg::identity(d);
        for r in 0..2 {
            for c in 0..2 {
                m[(d - 2 + r, d - 2 + c)] = block[r][c];
            }
        }
        m
    }

    #[test]
    fn cnot_matches_outer_product_form() {
        // |00><00| + |01><01| + |10><11| + |11><10|
        let mut cnot = CMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(r, c)] = ONE;
        }
        assert_eq!(lambda_not(1).matrix(), &cnot);
        assert_eq!(controlled(&pauli_x()).unwrap().matrix(), &cnot);
    }

    #[test]
    fn toffoli_and_lambda3_blocks() {
        let sx = [[ZERO, ONE], [ONE, ZERO]];
        assert_eq!(lambda_not(2).matrix(), &block_diag_identity_sigma(8, sx));
        assert_eq!(lambda_not(3).matrix(), &block_diag_identity_sigma(16, sx));
        assert_eq!(lambda_not(0).matrix(), &linalg::pauli_x());
    }

    #[test]
    fn modified_gate_bottom_block() {
        let m = modified_lambda_not(2).unwrap();
        assert_eq!(
            m.matrix(),
            &block_diag_identity_sigma(8, [[ZERO, -I], [-I, ZERO]])
        );
        let sq = m.pow(2);
        let mut expected = linalg::identity(8);
        expected[(6, 6)] = -ONE;
        expected[(7, 7)] = -ONE;
        assert!(max_abs_diff(sq.matrix(), &expected) < 1e-15);
        for (a, b) in m.matrix().iter().zip(lambda_not(2).matrix().iter()) {
            assert_eq!(a.norm(), b.norm());
        }
        assert!(modified_lambda_not(0).is_err());
    }

    #[test]
    fn modified_gate_is_exponential_of_projector() {
        // exp(-i pi/2 P (x) sigma_x), P = projector onto |11>
        for n in 1..=3 {
            let d = 1 << (n + 1);
            let mut gen = CMatrix::zeros(d, d);
            gen[(d - 2, d - 1)] = ONE;
            gen[(d - 1, d - 2)] = ONE;
            let u = linalg::expm_hermitian(&gen, PI / 2.0);
            assert!(max_abs_diff(&u, modified_lambda_not(n).unwrap().matrix()) < 1e-12);
        }
    }

    #[test]
    fn rotations() {
        assert!(max_abs_diff(rotation(Axis::X, PI).matrix(), &(linalg::pauli_x() * -I)) < 1e-15);
        assert!(max_abs_diff(rotation(Axis::Z, 0.0).matrix(), &linalg::identity(2)) < 1e-15);
        assert!(
            max_abs_diff(
                transverse_rotation(PI / 2.0, 1.1).matrix(),
                rotation(Axis::Y, 1.1).matrix()
            ) < 1e-15
        );
        assert!(max_abs_diff(x_power(0.5).pow(2).matrix(), &linalg::pauli_x()) < 1e-15);
    }

    #[test]
    fn embed_conventions() {
        let x2 = embed(&pauli_x(), &[1], 2).unwrap();
        assert_eq!(x2.matrix() * basis(4, 0b00), basis(4, 0b01));

        let c = embed(&lambda_not(1), &[0, 1], 3).unwrap();
        let expected = linalg::kron(lambda_not(1).matrix(), &linalg::identity(2));
        assert_eq!(c.matrix(), &expected);

        // control on qubit 1, target qubit 0
        let rev = embed(&lambda_not(1), &[1, 0], 2).unwrap();
        let table = [(0b00, 0b00), (0b01, 0b11), (0b10, 0b10), (0b11, 0b01)];
        for (input, output) in table {
            assert_eq!(rev.matrix() * basis(4, input), basis(4, output));
        }
    }

    #[test]
    fn embed_rejects_bad_wires() {
        assert!(embed(&lambda_not(1), &[0, 0], 2).is_err());
        assert!(embed(&lambda_not(1), &[0, 2], 2).is_err());
        assert!(embed(&lambda_not(1), &[0], 2).is_err());
    }

    #[test]
    fn fidelity_metrics() {
        let u = lambda_not(2);
        assert!((gate_fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        let phased = UnitaryGate::new(u.matrix() * Complex64::from_polar(1.0, 0.7)).unwrap();
        assert!((gate_fidelity(&u, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            gate_fidelity(&UnitaryGate::identity(1), &pauli_x()).unwrap(),
            0.0
        );
        assert!(gate_fidelity(&u, &pauli_x()).is_err());
        let m = modified_lambda_not(2).unwrap();
        assert!((phase_stripped_fidelity(&u, &m).unwrap() - 1.0).abs() < 1e-15);
        assert!(gate_fidelity(&u, &m).unwrap() < 1.0);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = linalg::identity(2) * Complex64::from(2.0);
        assert!(matches!(UnitaryGate::new(m), Err(Error::NotUnitary(_))));
        assert!(UnitaryGate::new(CMatrix::zeros(3, 3)).is_err());
    }
}
