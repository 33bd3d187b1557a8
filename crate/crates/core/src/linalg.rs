//! Dense complex matrix helpers shared by the simulator modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn from_rows(rows: &[&[Complex64]]) -> CMatrix {
    let n = rows.len();
    CMatrix::from_fn(n, rows[0].len(), |r, c| rows[r][c])
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    let d = values.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

pub fn pauli_x() -> CMatrix {
    from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y() -> CMatrix {
    from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_error(u: &CMatrix) -> f64 {
    let d = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(d))
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `exp(-i h t)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let d = h.nrows();
    if is_diagonal(h) {
        let phases: Vec<Complex64> = (0..d)
            .map(|i| Complex64::from_polar(1.0, -h[(i, i)].re * t))
            .collect();
        return diag(&phases);
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * t);
        for i in 0..d {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    let d = m.nrows();
    (0..d).all(|r| (0..d).all(|c| r == c || m[(r, c)] == ZERO))
}
