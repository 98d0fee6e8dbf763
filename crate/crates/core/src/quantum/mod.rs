//! Dense complex linear algebra and quantum-information primitives on small
//! Hilbert spaces.
//!
//! The single-ion basis is ordered `(|0>, |1>, |2>, |a>)`; the computational
//! qubit lives on indices 0 and 1. Dimensions are runtime values so the same
//! types serve the four-level ion and truncated spin-phonon spaces.

mod channel;
mod types;

pub use channel::{cardinal_states, QubitChannel};
pub use types::{DensityMatrix, Operator, StateVector};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Centralized numerical tolerances.
pub mod tol {
    /// Structural checks: normalization, Hermiticity, trace.
    pub const STRUCTURAL: f64 = 1e-10;
    /// Smallest eigenvalue accepted for a density matrix.
    pub const EIGEN_FLOOR: f64 = -1e-9;
    /// Unitarity precondition for fidelity comparisons.
    pub const UNITARY: f64 = 1e-8;
}

/// Index of each single-ion level in the four-level basis.
pub mod level {
    pub const ZERO: usize = 0;
    pub const ONE: usize = 1;
    pub const TWO: usize = 2;
    pub const AUX: usize = 3;
    pub const DIM: usize = 4;
    pub const LABELS: [&str; 4] = ["0", "1", "2", "a"];
}

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Which factor of a bipartite space to keep in [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [CMatrix; 4] {
    [
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// Kronecker product of two operators, `a` as the slow index.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator::from_matrix_unchecked(a.matrix().kronecker(b.matrix()))
}

/// Kronecker product of two state vectors, `a` as the slow index.
pub fn tensor_states(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a.amplitudes().kronecker(b.amplitudes());
    let labels = a
        .labels()
        .iter()
        .flat_map(|la| b.labels().iter().map(move |lb| format!("{la}{lb}")))
        .collect();
    StateVector::from_parts_unchecked(amps, labels)
}

/// Global-phase-insensitive overlap `|Tr(U^dagger V)| / d` of two unitaries.
pub fn operator_fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    Ok(trace_overlap(u.matrix(), v.matrix()))
}

/// `|Tr(A^dagger B)| / d` without unitarity requirements. Used for
/// restricted blocks that may carry leakage.
pub fn trace_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows() as f64;
    let tr: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    (tr.norm() / d).min(1.0)
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let sqrt_rho = hermitian_sqrt(rho.matrix());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let eig = SymmetricEigen::new(hermitize(&inner));
    let tr: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Coefficients `c_k = Tr(P_k M) / 2` over `[I, X, Y, Z]`.
pub fn pauli_decompose(m: &Operator) -> Result<[C64; 4]> {
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: m.dim(),
        });
    }
    let ps = paulis();
    let mut out = [ZERO; 4];
    for (k, p) in ps.iter().enumerate() {
        out[k] = (p * m.matrix()).trace() * 0.5;
    }
    Ok(out)
}

/// Inverse of [`pauli_decompose`].
pub fn pauli_reconstruct(coeffs: &[C64; 4]) -> Operator {
    let ps = paulis();
    let m = ps
        .iter()
        .zip(coeffs)
        .fold(CMatrix::zeros(2, 2), |acc, (p, &ck)| acc + p * ck);
    Operator::from_matrix_unchecked(m)
}

/// Reduced density matrix on `A` or `B` of a state on `A (x) B`.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da * db != rho.dim() || da == 0 || db == 0 {
        return Err(Error::NotFactorizable {
            dim: rho.dim(),
            a: da,
            b: db,
        });
    }
    let out = trace_out(rho.matrix(), dims, keep);
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Partial trace of any operator on `A (x) B`; dimensions are trusted.
pub(crate) fn trace_out(m: &CMatrix, (da, db): (usize, usize), keep: Subsystem) -> CMatrix {
    match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    }
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues are
/// clipped to zero.
pub(crate) fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |l| l.max(0.0).sqrt())
}

pub(crate) fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = SymmetricEigen::new(hermitize(m));
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c(f(l), 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitize(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Column-stacking vectorization.
pub(crate) fn vec_col(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub(crate) fn unvec_col(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}
