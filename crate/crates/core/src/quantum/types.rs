use super::{c, hermitize, min_eigenvalue, tol, CMatrix, CVector, C64};
use crate::error::{Error, Result};

/// A square complex matrix acting on a finite Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(CMatrix);

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.dim(),
            });
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        Ok(StateVector::from_parts_unchecked(
            &self.0 * psi.amplitudes(),
            psi.labels().to_vec(),
        ))
    }

    /// Frobenius norm of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.0.adjoint() * &self.0 - CMatrix::identity(self.dim(), self.dim())).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.0 - self.0.adjoint()).camax() <= tol
    }

    /// Expectation-style sandwich `<a| self |b>`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> C64 {
        a.amplitudes().dotc(&(&self.0 * b.amplitudes()))
    }
}

/// A normalized pure state with basis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    labels: Vec<String>,
}

impl StateVector {
    /// Wraps already-normalized amplitudes; fails if the norm is off by more
    /// than the structural tolerance.
    pub fn new(amps: CVector) -> Result<Self> {
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::NotNormalized(n2));
        }
        let labels = default_labels(amps.len());
        Ok(Self { amps, labels })
    }

    pub fn normalized(amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        let labels = default_labels(amps.len());
        Ok(Self {
            amps: amps / c(n, 0.0),
            labels,
        })
    }

    pub(crate) fn from_parts_unchecked(amps: CVector, labels: Vec<String>) -> Self {
        Self { amps, labels }
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut amps = CVector::zeros(d);
        amps[k] = c(1.0, 0.0);
        Self {
            amps,
            labels: default_labels(d),
        }
    }

    /// Basis state of the four-level ion, labelled `0, 1, 2, a`.
    pub fn level(k: usize) -> Self {
        Self::basis(4, k).with_labels(super::level::LABELS.iter().map(|s| s.to_string()).collect())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.amps.len(), "one label per basis state");
        self.labels = labels;
        self
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, phase: C64) -> Self {
        Self {
            amps: &self.amps * phase,
            labels: self.labels.clone(),
        }
    }
}

fn default_labels(d: usize) -> Vec<String> {
    (0..d).map(|k| k.to_string()).collect()
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let herm = (&m - m.adjoint()).camax();
        if herm > tol::STRUCTURAL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol::STRUCTURAL || tr.im.abs() > tol::STRUCTURAL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let lmin = min_eigenvalue(&m);
        if lmin < tol::EIGEN_FLOOR {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {lmin:e}"
            )));
        }
        Ok(Self(hermitize(&m)))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self(a * a.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(CMatrix::identity(d, d) / c(d as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)].re).collect()
    }

    /// `Tr(rho P)` for a projector or observable `P`.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (&self.0 * op).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    pub fn evolve(&self, u: &Operator) -> Self {
        Self(u.matrix() * &self.0 * u.matrix().adjoint())
    }
}
