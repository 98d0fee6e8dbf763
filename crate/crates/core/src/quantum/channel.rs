use std::f64::consts::FRAC_1_SQRT_2;

use super::{
    c, paulis, unvec_col, vec_col, CMatrix, CVector, DensityMatrix, Operator, StateVector, C64,
    ONE, ZERO,
};
use crate::error::{Error, Result};

/// A linear map on single-qubit operators, stored as its 4x4 Liouville
/// (column-stacking) matrix: `vec(E(rho)) = L vec(rho)`.
///
/// Channels restricted from a larger space may be trace-decreasing; the
/// missing trace is leakage out of the qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitChannel {
    liouville: CMatrix,
}

/// The six cardinal states `|0>, |1>, |+>, |->, |+i>, |-i>`.
pub fn cardinal_states() -> [StateVector; 6] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let ih = c(0.0, FRAC_1_SQRT_2);
    let mk = |a: C64, b: C64| {
        StateVector::from_parts_unchecked(
            CVector::from_vec(vec![a, b]),
            vec!["0".into(), "1".into()],
        )
    };
    [
        mk(ONE, ZERO),
        mk(ZERO, ONE),
        mk(h, h),
        mk(h, -h),
        mk(h, ih),
        mk(h, -ih),
    ]
}

impl QubitChannel {
    pub fn from_liouville(liouville: CMatrix) -> Result<Self> {
        if liouville.nrows() != 4 || liouville.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: liouville.nrows(),
            });
        }
        Ok(Self { liouville })
    }

    pub fn identity() -> Self {
        Self {
            liouville: CMatrix::identity(4, 4),
        }
    }

    /// Single-Kraus map `rho -> M rho M^dagger`.
    pub fn from_kraus(m: &CMatrix) -> Self {
        Self {
            liouville: m.conjugate().kronecker(m),
        }
    }

    pub fn from_unitary(u: &Operator) -> Result<Self> {
        if u.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: u.dim(),
            });
        }
        Ok(Self::from_kraus(u.matrix()))
    }

    /// Restricts a superoperator on a `d`-level space (column-stacking
    /// Liouville form, `d^2 x d^2`) to inputs and outputs on levels 0 and 1.
    pub fn restrict(superop: &CMatrix, d: usize) -> Result<Self> {
        if superop.nrows() != d * d || superop.ncols() != d * d || d < 2 {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: superop.nrows(),
            });
        }
        let idx = |i: usize, j: usize| i + d * j;
        let liouville = CMatrix::from_fn(4, 4, |r, s| {
            let (k, l) = (r % 2, r / 2);
            let (i, j) = (s % 2, s / 2);
            superop[(idx(k, l), idx(i, j))]
        });
        Ok(Self { liouville })
    }

    /// `rho -> (1 - p) rho + p Tr(rho) I/2`.
    pub fn depolarizing(p: f64) -> Self {
        let vid = CVector::from_vec(vec![ONE, ZERO, ZERO, ONE]);
        let liouville =
            CMatrix::identity(4, 4) * c(1.0 - p, 0.0) + (&vid * vid.transpose()) * c(p / 2.0, 0.0);
        Self { liouville }
    }

    pub fn liouville(&self) -> &CMatrix {
        &self.liouville
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec_col(&(&self.liouville * vec_col(rho)), 2)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> CMatrix {
        self.apply(rho.matrix())
    }

    /// Channel that applies `self` first, then `next`.
    pub fn then(&self, next: &QubitChannel) -> QubitChannel {
        Self {
            liouville: &next.liouville * &self.liouville,
        }
    }

    /// Choi matrix `J = sum_ij |i><j| (x) E(|i><j|)`, input as slow index.
    pub fn choi(&self) -> CMatrix {
        let mut j = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(a, b)] = ONE;
                let out = self.apply(&e);
                for k in 0..2 {
                    for l in 0..2 {
                        j[(2 * a + k, 2 * b + l)] = out[(k, l)];
                    }
                }
            }
        }
        j
    }

    pub fn from_choi(j: &CMatrix) -> Result<Self> {
        if j.nrows() != 4 || j.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: j.nrows(),
            });
        }
        let liouville = CMatrix::from_fn(4, 4, |r, s| {
            let (k, l) = (r % 2, r / 2);
            let (a, b) = (s % 2, s / 2);
            j[(2 * a + k, 2 * b + l)]
        });
        Ok(Self { liouville })
    }

    /// Process matrix in the unnormalized Pauli basis `[I, X, Y, Z]`:
    /// `E(rho) = sum_mn chi_mn P_m rho P_n`. Trace-preserving maps have
    /// `Tr(chi) = 1`.
    pub fn chi(&self) -> CMatrix {
        let ps = paulis();
        CMatrix::from_fn(4, 4, |m, n| {
            let basis = ps[n].conjugate().kronecker(&ps[m]);
            let tr: C64 = basis
                .iter()
                .zip(self.liouville.iter())
                .map(|(b, l)| b.conj() * l)
                .sum();
            tr / 4.0
        })
    }

    pub fn from_chi(chi: &CMatrix) -> Self {
        let ps = paulis();
        let mut liouville = CMatrix::zeros(4, 4);
        for m in 0..4 {
            for n in 0..4 {
                liouville += ps[n].conjugate().kronecker(&ps[m]) * chi[(m, n)];
            }
        }
        Self { liouville }
    }

    /// Average gate fidelity against a target unitary, evaluated exactly as
    /// the mean over the six cardinal states (a state 2-design).
    pub fn average_fidelity(&self, target: &Operator) -> Result<f64> {
        if target.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: target.dim(),
            });
        }
        let v = target.matrix();
        let total: f64 = cardinal_states()
            .iter()
            .map(|psi| {
                let a = psi.amplitudes();
                let out = self.apply(&(a * a.adjoint()));
                let ideal = v * a;
                ideal.dotc(&(&out * &ideal)).re
            })
            .sum();
        Ok((total / 6.0).clamp(0.0, 1.0))
    }

    /// `1 - Tr(E(I/2))`, the trace lost on average.
    pub fn leakage(&self) -> f64 {
        let out = self.apply(&(CMatrix::identity(2, 2) * c(0.5, 0.0)));
        (1.0 - out.trace().re).max(0.0)
    }
}
