use super::sampling::{measure, Axis, AxisCounts, Readout};
use crate::error::{Error, Result};
use crate::quantum::{
    c, cardinal_states, hermitize, min_eigenvalue, paulis, tol, trace_out, CMatrix, DensityMatrix,
    Operator, QubitChannel, StateVector, Subsystem,
};

pub const MLE_GAIN_TOL: f64 = 1e-10;
pub const MLE_MAX_ITER: usize = 10_000;

/// `|0>, |1>, (|0> +- |1>)/sqrt2, (|0> +- i|1>)/sqrt2`.
pub fn basis_states() -> [StateVector; 6] {
    cardinal_states()
}

/// Outcome weights on the x, y and z axes for one unknown state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCounts {
    pub x: AxisCounts,
    pub y: AxisCounts,
    pub z: AxisCounts,
}

impl StateCounts {
    pub fn measure(rho: &CMatrix, readout: &Readout, unit: u64) -> Self {
        let m = |k: u64, a: Axis| measure(rho, a, readout, 3 * unit + k);
        Self {
            x: m(0, Axis::X),
            y: m(1, Axis::Y),
            z: m(2, Axis::Z),
        }
    }

    fn by_axis(&self) -> [(Axis, AxisCounts); 3] {
        [(Axis::X, self.x), (Axis::Y, self.y), (Axis::Z, self.z)]
    }

    /// Bloch vector by linear inversion; may leave the unit ball.
    pub fn bloch(&self) -> [f64; 3] {
        let comp = |a: AxisCounts| {
            let n = a[0] + a[1];
            if n > 0.0 {
                (a[0] - a[1]) / n
            } else {
                0.0
            }
        };
        [comp(self.x), comp(self.y), comp(self.z)]
    }

    fn total(&self) -> f64 {
        self.by_axis().iter().map(|(_, a)| a[0] + a[1]).sum()
    }
}

fn bloch_state(r: [f64; 3]) -> CMatrix {
    let [id, x, y, z] = paulis();
    (id + x * c(r[0], 0.0) + y * c(r[1], 0.0) + z * c(r[2], 0.0)) * c(0.5, 0.0)
}

fn log_likelihood(rho: &CMatrix, counts: &StateCounts) -> f64 {
    let mut l = 0.0;
    for (axis, n) in counts.by_axis() {
        for (k, &nk) in n.iter().enumerate() {
            if nk > 0.0 {
                let p = (axis.projector(k) * rho).trace().re.max(1e-300);
                l += nk * p.ln();
            }
        }
    }
    l
}

/// Maximum-likelihood single-qubit state from x/y/z outcome weights, by the
/// `R rho R` fixed-point iteration started from the linear-inversion Bloch
/// vector pulled just inside the unit ball.
pub fn state_mle(counts: &StateCounts) -> Result<DensityMatrix> {
    let total = counts.total();
    if !(total > 0.0) {
        return Err(Error::DegenerateCounts);
    }
    let mut r = counts.bloch();
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let cap = 1.0 - 1e-12;
    if len > cap {
        r.iter_mut().for_each(|v| *v *= cap / len);
    }
    let mut rho = bloch_state(r);
    let mut like = log_likelihood(&rho, counts);
    for _ in 0..MLE_MAX_ITER {
        let mut big_r = CMatrix::zeros(2, 2);
        for (axis, n) in counts.by_axis() {
            for (k, &nk) in n.iter().enumerate() {
                if nk > 0.0 {
                    let proj = axis.projector(k);
                    let p = (&proj * &rho).trace().re.max(1e-300);
                    big_r += proj * c(nk / (total * p), 0.0);
                }
            }
        }
        let next = &big_r * &rho * &big_r;
        let next = hermitize(&(&next / next.trace()));
        let next_like = log_likelihood(&next, counts);
        let gain = next_like - like;
        rho = next;
        like = next_like;
        if gain < MLE_GAIN_TOL * total.max(1.0) {
            break;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// Process matrix in the Pauli basis `[I, X, Y, Z]`, trace 1 for
/// trace-preserving processes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    chi: CMatrix,
}

impl ProcessMatrix {
    pub fn new(chi: CMatrix) -> Result<Self> {
        if chi.nrows() != 4 || chi.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: chi.nrows(),
            });
        }
        if (&chi - chi.adjoint()).camax() > 1e-8 {
            return Err(Error::InvalidSpec("process matrix is not Hermitian".into()));
        }
        Ok(Self { chi })
    }

    pub fn from_channel(channel: &QubitChannel) -> Self {
        Self {
            chi: hermitize(&channel.chi()),
        }
    }

    pub fn of_unitary(u: &Operator) -> Result<Self> {
        Ok(Self::from_channel(&QubitChannel::from_unitary(u)?))
    }

    pub fn chi(&self) -> &CMatrix {
        &self.chi
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.chi)
    }

    /// `|Tr(chi chi_other^dagger)|`.
    pub fn overlap(&self, other: &ProcessMatrix) -> f64 {
        (&self.chi * other.chi.adjoint()).trace().norm()
    }

    pub fn channel(&self) -> QubitChannel {
        QubitChannel::from_chi(&self.chi)
    }

    /// Real and imaginary parts as two 4x4 blocks.
    pub fn to_csv(&self) -> String {
        use crate::pulse::fmt_sig;
        let mut out = String::from("part,row,c0,c1,c2,c3\n");
        for (name, f) in [
            ("re", (|z: crate::quantum::C64| z.re) as fn(_) -> f64),
            ("im", |z| z.im),
        ] {
            for r in 0..4 {
                let cells: Vec<String> = (0..4).map(|k| fmt_sig(f(self.chi[(r, k)]))).collect();
                out.push_str(&format!("{name},{r},{}\n", cells.join(",")));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct QptResult {
    pub process: ProcessMatrix,
    pub fidelity: f64,
    /// Maximum-likelihood output state for each of the six inputs.
    pub outputs: Vec<DensityMatrix>,
    pub iterations: usize,
}

/// Process tomography of a qubit channel: the six basis states are sent
/// through, each output is measured on x, y, z and reconstructed by state
/// MLE; a linear-inversion Choi matrix seeds a completely-positive,
/// trace-preserving likelihood maximization over all outcome weights.
pub fn qpt(channel: &QubitChannel, target: &Operator, readout: &Readout) -> Result<QptResult> {
    let inputs: Vec<CMatrix> = basis_states()
        .iter()
        .map(|s| s.amplitudes() * s.amplitudes().adjoint())
        .collect();
    let counts: Vec<StateCounts> = inputs
        .iter()
        .enumerate()
        .map(|(i, rho)| StateCounts::measure(&channel.apply(rho), readout, i as u64))
        .collect();
    let outputs = counts.iter().map(state_mle).collect::<Result<Vec<_>>>()?;
    let linear = linear_inversion(&inputs, &outputs)?;
    let (choi, iterations) = process_mle(&inputs, &counts, seed_choi(&linear.choi()))?;
    let process = ProcessMatrix::from_channel(&QubitChannel::from_choi(&choi)?);
    let fidelity = process.overlap(&ProcessMatrix::of_unitary(target)?);
    Ok(QptResult {
        process,
        fidelity,
        outputs,
        iterations,
    })
}

/// Least-squares Liouville matrix mapping the input states to the
/// reconstructed outputs.
pub fn linear_inversion(inputs: &[CMatrix], outputs: &[DensityMatrix]) -> Result<QubitChannel> {
    let x = CMatrix::from_fn(4, inputs.len(), |r, k| inputs[k][(r % 2, r / 2)]);
    let y = CMatrix::from_fn(4, outputs.len(), |r, k| outputs[k].matrix()[(r % 2, r / 2)]);
    let pinv = x
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::InvalidSpec(format!("tomography inputs not invertible: {e}")))?;
    QubitChannel::from_liouville(y * pinv)
}

/// A strictly positive, trace-preserving starting point close to `choi`
/// when `choi` is physical; the completely depolarizing map otherwise.
fn seed_choi(choi: &CMatrix) -> CMatrix {
    let j = hermitize(choi);
    let tp_ok = (trace_out(&j, (2, 2), Subsystem::A) - CMatrix::identity(2, 2)).camax() < 1e-6;
    let mixed = CMatrix::identity(4, 4) * c(0.5, 0.0);
    if tp_ok && min_eigenvalue(&j) > tol::EIGEN_FLOOR {
        let w = 1e-7;
        &j * c(1.0 - w, 0.0) + mixed * c(w, 0.0)
    } else {
        mixed
    }
}

fn choi_likelihood(j: &CMatrix, ops: &[(CMatrix, f64)]) -> f64 {
    ops.iter()
        .filter(|(_, n)| *n > 0.0)
        .map(|(e, n)| n * (e * j).trace().re.max(1e-300).ln())
        .sum()
}

/// Iterative CPTP maximum-likelihood process estimate. Outcome probabilities
/// are `Tr[J (rho_in^T (x) Pi)]` with the input as the slow Choi index.
fn process_mle(
    inputs: &[CMatrix],
    counts: &[StateCounts],
    start: CMatrix,
) -> Result<(CMatrix, usize)> {
    let mut ops = Vec::new();
    for (rho, cnt) in inputs.iter().zip(counts) {
        for (axis, n) in cnt.by_axis() {
            for (k, &nk) in n.iter().enumerate() {
                ops.push((rho.transpose().kronecker(&axis.projector(k)), nk));
            }
        }
    }
    let total: f64 = ops.iter().map(|(_, n)| n).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateCounts);
    }
    let mut j = start;
    let mut like = choi_likelihood(&j, &ops);
    let mut iterations = 0;
    for _ in 0..MLE_MAX_ITER {
        iterations += 1;
        let mut k = CMatrix::zeros(4, 4);
        for (e, n) in &ops {
            if *n > 0.0 {
                let p = (e * &j).trace().re.max(1e-300);
                k += e * c(n / p, 0.0);
            }
        }
        let kjk = &k * &j * &k;
        let lambda = trace_out(&kjk, (2, 2), Subsystem::A);
        let inv_sqrt =
            crate::quantum::hermitian_map(&hermitize(&lambda), |v| 1.0 / v.max(1e-300).sqrt());
        let lift = inv_sqrt.kronecker(&CMatrix::identity(2, 2));
        let next = hermitize(&(&lift * kjk * &lift));
        let next_like = choi_likelihood(&next, &ops);
        let gain = next_like - like;
        j = next;
        like = next_like;
        if gain < MLE_GAIN_TOL * total.max(1.0) {
            break;
        }
    }
    Ok((j, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterization::sampling::ShotConfig;
    use crate::gates::{target_unitary, GateName};
    use crate::quantum::state_fidelity;

    fn exact(psi: &StateVector) -> StateCounts {
        let a = psi.amplitudes();
        StateCounts::measure(&(a * a.adjoint()), &Readout::Exact, 0)
    }

    #[test]
    fn basis_state_list() {
        let b = basis_states();
        assert_eq!(b.len(), 6);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(b[0].amplitudes()[0], c(1.0, 0.0));
        assert!((b[2].amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((b[2].amplitudes()[1] - c(s, 0.0)).norm() < 1e-15);
        let blochs: Vec<[f64; 3]> = b.iter().map(exact).map(|k| k.bloch()).collect();
        let expected = [
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
        ];
        for (got, want) in blochs.iter().zip(expected) {
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mle_of_exact_pure_states() {
        for psi in basis_states() {
            let rho = state_mle(&exact(&psi)).unwrap();
            let f = state_fidelity(&rho, &DensityMatrix::from_pure(&psi)).unwrap();
            assert!(f >= 1.0 - 1e-6, "{f}");
            assert!(rho.min_eigenvalue() >= tol::EIGEN_FLOOR);
        }
    }

    #[test]
    fn mle_projects_unphysical_counts() {
        // linear inversion gives a Bloch vector of length 1.2
        let r = 1.2 / 3f64.sqrt();
        let w = |r: f64| [1000.0 * (1.0 + r) / 2.0, 1000.0 * (1.0 - r) / 2.0];
        let counts = StateCounts {
            x: w(r),
            y: w(r),
            z: w(r),
        };
        let b = counts.bloch();
        assert!(((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() - 1.2).abs() < 1e-12);
        let rho = state_mle(&counts).unwrap();
        assert!(rho.min_eigenvalue() >= -1e-12);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        DensityMatrix::new(rho.into_matrix()).unwrap();
    }

    #[test]
    fn all_zero_counts_rejected() {
        let z = StateCounts {
            x: [0.0; 2],
            y: [0.0; 2],
            z: [0.0; 2],
        };
        assert!(matches!(state_mle(&z), Err(Error::DegenerateCounts)));
    }

    #[test]
    fn exact_qpt_of_named_gates() {
        for g in GateName::ALL {
            let u = g.target();
            let ch = QubitChannel::from_unitary(&u).unwrap();
            let res = qpt(&ch, &u, &Readout::Exact).unwrap();
            assert!((res.fidelity - 1.0).abs() < 1e-6, "{g}: {}", res.fidelity);
        }
    }

    #[test]
    fn finite_shot_qpt_is_physical() {
        let u = target_unitary(0.4, 1.1, 2.0);
        let ch = QubitChannel::from_unitary(&u).unwrap();
        let res = qpt(&ch, &u, &Readout::Shots(ShotConfig::new(2000, 5).unwrap())).unwrap();
        let p = &res.process;
        assert!((p.chi() - p.chi().adjoint()).camax() < 1e-8);
        assert!(p.min_eigenvalue() >= -1e-8);
        assert!((p.trace() - 1.0).abs() < 1e-8);
        assert!(res.fidelity > 0.97);
    }

    #[test]
    fn qpt_of_depolarizing_channel() {
        let p = 0.1;
        let res = qpt(
            &QubitChannel::depolarizing(p),
            &Operator::identity(2),
            &Readout::Exact,
        )
        .unwrap();
        // chi_00 of a depolarizing channel is 1 - 3p/4
        assert!((res.fidelity - (1.0 - 0.75 * p)).abs() < 1e-6);
    }
}
