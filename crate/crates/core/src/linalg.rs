//! Dense complex linear algebra used by the propagators: Hermitian
//! diagonalization, unitary exponentials and a few matrix norms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{Operator, C64};

/// Tolerance used to accept an operator as Hermitian before diagonalizing.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Largest absolute entry.
pub fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |M - M^dag|` over all entries.
pub fn hermiticity_deviation(m: &Operator) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn trace(m: &Operator) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// Spectral decomposition `H = V diag(values) V^dag` of a Hermitian
/// operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: DVector<f64>,
    pub vectors: Operator,
}

impl HermitianEig {
    /// `exp(-i t H)`.
    pub fn unitary(&self, t: f64) -> Operator {
        let phases: Vec<C64> = self
            .values
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.vectors.adjoint()
    }

    /// `V diag(values) V^dag`.
    pub fn reconstruct(&self) -> Operator {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from(self.values[j]);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Diagonalizes a Hermitian operator. Fails if `h` deviates from
/// Hermiticity by more than [`HERMITIAN_TOL`] relative to its scale.
pub fn hermitian_eig(h: &Operator) -> Result<HermitianEig> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NonHermitian { deviation: dev });
    }
    let sym = (h + h.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(sym);

    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NonHermitian { deviation: dev });
    }
    let sym = (h + h.adjoint()) * C64::from(0.5);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
