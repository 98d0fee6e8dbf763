//! Time-dependent Hamiltonian of the driven four-level ion, unitary and
//! Lindblad propagation, and the analytic dark-path frame.

mod integrate;

pub(crate) use integrate::{evolve, uniform_grid};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pulse::{fmt_sig, LoopSchedule, PulseSchedule};
use crate::quantum::{
    c, hermitize, level, unvec_col, vec_col, CMatrix, CVector, DensityMatrix, Operator,
    StateVector, C64, I,
};

/// Default convergence tolerance for propagators.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `H_1(t) = sum_j Omega_j(t)/2 e^{-i phi_j} |j><a| + h.c.` on `(|0>, |1>, |2>, |a>)`.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    schedule: PulseSchedule,
}

impl HamiltonianModel {
    pub fn new(schedule: PulseSchedule) -> Self {
        Self { schedule }
    }

    pub fn schedule(&self) -> &PulseSchedule {
        &self.schedule
    }

    pub fn duration(&self) -> f64 {
        self.schedule.duration()
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<Operator> {
        let amps = self.schedule.amplitudes_at(t)?;
        let phases = self.schedule.phases_at(t)?;
        Ok(Operator::from_matrix_unchecked(build_h(&amps, &phases)))
    }

    /// `H` at a time known to lie inside the loop; phases follow the
    /// segment so that interior points never see the midpoint ambiguity.
    fn h_unchecked(&self, t: f64) -> CMatrix {
        let t = t.clamp(0.0, self.duration());
        let amps = self.schedule.amplitudes_at(t).expect("clamped");
        let phases = self.schedule.phases_at(t).expect("clamped");
        build_h(&amps, &phases)
    }
}

fn build_h(amps: &[f64; 3], phases: &[f64; 3]) -> CMatrix {
    let mut h = CMatrix::zeros(level::DIM, level::DIM);
    for j in 0..3 {
        let v = C64::from_polar(amps[j] / 2.0, -phases[j]);
        h[(j, level::AUX)] = v;
        h[(level::AUX, j)] = v.conj();
    }
    h
}

/// Collapse operators with rates in 1/s for `d rho/dt = -i[H, rho] +
/// sum_k g_k (L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho})`.
#[derive(Debug, Clone, Default)]
pub struct NoiseModel {
    collapse: Vec<(Operator, f64)>,
}

impl NoiseModel {
    pub fn new(collapse: Vec<(Operator, f64)>) -> Result<Self> {
        for (op, rate) in &collapse {
            if !(rate.is_finite() && *rate >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "collapse rate must be >= 0, got {rate}"
                )));
            }
            if op.dim() != collapse[0].0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: collapse[0].0.dim(),
                    got: op.dim(),
                });
            }
        }
        Ok(Self { collapse })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Pure dephasing of `|1>, |2>, |a>` relative to `|0>`: projectors
    /// `|k><k|` at rate `2/T2`, so each coherence `rho_0k` decays as
    /// `exp(-t/T2)`. A positive `depolarizing_rate` adds uniform
    /// depolarization `D(rho) = Gamma (I/4 - rho)` on the four levels.
    pub fn dephasing(t2: Option<f64>, depolarizing_rate: f64) -> Result<Self> {
        let mut collapse = Vec::new();
        if let Some(t2) = t2 {
            if !(t2.is_finite() && t2 > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "T2 must be positive, got {t2}"
                )));
            }
            for k in [level::ONE, level::TWO, level::AUX] {
                let mut p = CMatrix::zeros(level::DIM, level::DIM);
                p[(k, k)] = c(1.0, 0.0);
                collapse.push((Operator::from_matrix_unchecked(p), 2.0 / t2));
            }
        }
        if depolarizing_rate > 0.0 {
            let d = level::DIM;
            for j in 0..d {
                for k in 0..d {
                    let mut l = CMatrix::zeros(d, d);
                    l[(j, k)] = c(1.0, 0.0);
                    collapse.push((
                        Operator::from_matrix_unchecked(l),
                        depolarizing_rate / d as f64,
                    ));
                }
            }
        } else if depolarizing_rate < 0.0 || !depolarizing_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "depolarizing rate must be >= 0, got {depolarizing_rate}"
            )));
        }
        Self::new(collapse)
    }

    pub fn is_noiseless(&self) -> bool {
        self.collapse.iter().all(|(_, r)| *r == 0.0)
    }

    pub fn collapse_operators(&self) -> &[(Operator, f64)] {
        &self.collapse
    }

    /// Dissipator in column-stacking Liouville form.
    fn dissipator(&self, d: usize) -> CMatrix {
        let id = CMatrix::identity(d, d);
        let mut out = CMatrix::zeros(d * d, d * d);
        for (op, rate) in &self.collapse {
            if *rate == 0.0 {
                continue;
            }
            let l = op.matrix();
            let ldl = l.adjoint() * l;
            let term = l.conjugate().kronecker(l)
                - id.kronecker(&ldl) * c(0.5, 0.0)
                - ldl.transpose().kronecker(&id) * c(0.5, 0.0);
            out += term * c(*rate, 0.0);
        }
        out
    }
}

/// Column-stacking Liouvillian of `-i[H, .]`.
fn hamiltonian_liouvillian(h: &CMatrix) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    (id.kronecker(h) - h.transpose().kronecker(&id)) * (-I)
}

/// Unitary propagator over the whole loop.
pub fn propagate_unitary(model: &HamiltonianModel, tol: f64) -> Result<Operator> {
    let grid = model.schedule().times();
    let ev = evolve(
        |t| model.h_unchecked(t) * (-I),
        &grid,
        &CMatrix::identity(level::DIM, level::DIM),
        tol,
        false,
    )?;
    Ok(Operator::from_matrix_unchecked(ev.final_state))
}

/// Propagators `U(t_k, 0)` at every schedule sample time.
pub fn propagate_unitary_trajectory(model: &HamiltonianModel, tol: f64) -> Result<Vec<Operator>> {
    let grid = model.schedule().times();
    let ev = evolve(
        |t| model.h_unchecked(t) * (-I),
        &grid,
        &CMatrix::identity(level::DIM, level::DIM),
        tol,
        true,
    )?;
    Ok(ev
        .snapshots
        .into_iter()
        .map(Operator::from_matrix_unchecked)
        .collect())
}

/// Propagates a Hermitian generator given as a closure over `grid`.
pub(crate) fn propagate_hamiltonian<H: Fn(f64) -> CMatrix>(
    h: H,
    grid: &[f64],
    initial: &CMatrix,
    tol: f64,
    record: bool,
) -> Result<(CMatrix, Vec<CMatrix>)> {
    let ev = evolve(|t| h(t) * (-I), grid, initial, tol, record)?;
    Ok((ev.final_state, ev.snapshots))
}

/// Density matrices along a Lindblad trajectory.
#[derive(Debug, Clone)]
pub struct LindbladTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl LindbladTrajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("non-empty trajectory")
    }
}

/// Solves the Lindblad master equation from `rho0` over the loop and
/// returns the state at every schedule sample.
pub fn propagate_lindblad(
    rho0: &DensityMatrix,
    model: &HamiltonianModel,
    noise: &NoiseModel,
    tol: f64,
) -> Result<LindbladTrajectory> {
    let d = level::DIM;
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.dim(),
        });
    }
    let diss = noise.dissipator(d);
    let grid = model.schedule().times();
    let v0 = CMatrix::from_column_slice(d * d, 1, vec_col(rho0.matrix()).as_slice());
    let ev = evolve(
        |t| hamiltonian_liouvillian(&model.h_unchecked(t)) + &diss,
        &grid,
        &v0,
        tol,
        true,
    )?;
    let states = ev
        .snapshots
        .iter()
        .map(|v| {
            let m = unvec_col(&CVector::from_column_slice(v.as_slice()), d);
            DensityMatrix::from_matrix_unchecked(hermitize(&m))
        })
        .collect();
    Ok(LindbladTrajectory {
        times: grid,
        states,
    })
}

/// Full Lindblad superoperator (column-stacking, `16 x 16`) over the loop.
pub fn lindblad_superoperator(
    model: &HamiltonianModel,
    noise: &NoiseModel,
    tol: f64,
) -> Result<CMatrix> {
    let d = level::DIM;
    let diss = noise.dissipator(d);
    let grid = model.schedule().times();
    let ev = evolve(
        |t| hamiltonian_liouvillian(&model.h_unchecked(t)) + &diss,
        &grid,
        &CMatrix::identity(d * d, d * d),
        tol,
        false,
    )?;
    Ok(ev.final_state)
}

/// Bright and decoupled dark state of the two qubit tones.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStates {
    pub bright: StateVector,
    pub dark1: StateVector,
    pub theta: f64,
    pub phi: f64,
}

/// `|b> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>` and
/// `|d_1> = -cos(theta/2) e^{-i phi}|0> - sin(theta/2)|1>`.
pub fn frame_states(theta: f64, phi: f64) -> FrameStates {
    let (s, co) = (theta / 2.0).sin_cos();
    let mut b = CVector::zeros(level::DIM);
    b[level::ZERO] = c(s, 0.0);
    b[level::ONE] = -C64::from_polar(co, phi);
    let mut d1 = CVector::zeros(level::DIM);
    d1[level::ZERO] = -C64::from_polar(co, -phi);
    d1[level::ONE] = c(-s, 0.0);
    let labels: Vec<String> = level::LABELS.iter().map(|s| s.to_string()).collect();
    FrameStates {
        bright: StateVector::from_parts_unchecked(b, labels.clone()),
        dark1: StateVector::from_parts_unchecked(d1, labels),
        theta,
        phi,
    }
}

/// `|d_2(t)> = cos(alpha) (cos(beta) e^{-i phi_0}|b> - sin(beta)|2>) - i sin(alpha)|a>`
/// with the bright-tone phase of the interval containing `t`.
pub fn dark_path_state(t: f64, lp: &LoopSchedule, frame: &FrameStates) -> Result<StateVector> {
    let a = lp.alpha(t)?;
    let b = lp.beta(t)?;
    let phi0 = lp.phase_at(t);
    let mut v = frame.bright.amplitudes() * C64::from_polar(a.cos() * b.cos(), -phi0);
    v[level::TWO] -= c(a.cos() * b.sin(), 0.0);
    v[level::AUX] += c(0.0, -a.sin());
    Ok(StateVector::from_parts_unchecked(
        v,
        frame.bright.labels().to_vec(),
    ))
}

/// Level populations `P_0, P_1, P_2, P_a` at every schedule sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub populations: Vec<[f64; 4]>,
}

impl PopulationTrace {
    pub fn final_populations(&self) -> [f64; 4] {
        *self.populations.last().expect("non-empty trace")
    }

    /// CSV with columns `t_s, p0, p1, p2, pa`, keeping every `stride`-th sample.
    pub fn to_csv(&self, stride: usize) -> String {
        let mut out = String::from("t_s,p0,p1,p2,pa\n");
        for (t, p) in self
            .times
            .iter()
            .zip(&self.populations)
            .step_by(stride.max(1))
        {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig(*t),
                fmt_sig(p[0]),
                fmt_sig(p[1]),
                fmt_sig(p[2]),
                fmt_sig(p[3])
            );
        }
        out
    }
}

pub fn population_trace(
    psi0: &StateVector,
    model: &HamiltonianModel,
    noise: Option<&NoiseModel>,
    tol: f64,
) -> Result<PopulationTrace> {
    if psi0.dim() != level::DIM {
        return Err(Error::DimensionMismatch {
            expected: level::DIM,
            got: psi0.dim(),
        });
    }
    let times = model.schedule().times();
    let populations = match noise.filter(|n| !n.is_noiseless()) {
        Some(noise) => {
            let traj = propagate_lindblad(&DensityMatrix::from_pure(psi0), model, noise, tol)?;
            traj.states
                .iter()
                .map(|rho| std::array::from_fn(|k| rho.matrix()[(k, k)].re))
                .collect()
        }
        None => {
            let psi = CMatrix::from_column_slice(level::DIM, 1, psi0.amplitudes().as_slice());
            let (_, snaps) =
                propagate_hamiltonian(|t| model.h_unchecked(t), &times, &psi, tol, true)?;
            snaps
                .iter()
                .map(|v| std::array::from_fn(|k| v[(k, 0)].norm_sqr()))
                .collect()
        }
    };
    Ok(PopulationTrace { times, populations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{synthesize, DriveBudget, GateSpec, DEFAULT_SAMPLES};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    const PEAK: f64 = 2.0 * PI * 1e4;

    fn x_model(eta: f64) -> HamiltonianModel {
        let spec = GateSpec::new(FRAC_PI_2, 0.0, PI, eta, DriveBudget::PeakRabi(PEAK)).unwrap();
        HamiltonianModel::new(synthesize(&spec, DEFAULT_SAMPLES).unwrap())
    }

    /// Constant single-tone schedule built by hand: only `Omega_0` drives.
    fn single_tone_model(omega: f64, duration: f64) -> HamiltonianModel {
        // theta = pi puts the whole bright drive on |0>; eta = 0 leaves
        // Omega_2 off. Overwrite the amplitude samples with a constant.
        let spec = GateSpec::new(PI, 0.0, 0.0, 0.0, DriveBudget::Duration(duration)).unwrap();
        let s = synthesize(&spec, 100).unwrap();
        HamiltonianModel::new(s.with_constant_tone(0, omega))
    }

    #[test]
    fn zero_and_single_tone_hamiltonians() {
        let spec = GateSpec::new(0.0, 0.0, 0.0, 0.0, DriveBudget::Duration(1.0)).unwrap();
        let zero =
            HamiltonianModel::new(synthesize(&spec, 100).unwrap().with_constant_tone(1, 0.0));
        assert!(zero.hamiltonian_at(0.3).unwrap().matrix().norm() == 0.0);

        let m = single_tone_model(2.0, 1.0);
        let h = m.hamiltonian_at(0.4).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 3)] = c(1.0, 0.0);
        expected[(3, 0)] = c(1.0, 0.0);
        assert!((h.matrix() - expected).norm() < 1e-15);
        assert!(m.hamiltonian_at(1.5).is_err());
    }

    #[test]
    fn hamiltonian_is_hermitian_and_matches_bright_dark_frame() {
        let m = x_model(4.0);
        let frame = frame_states(FRAC_PI_2, 0.0);
        let t = m.duration() / 4.0;
        let h = m.hamiltonian_at(t).unwrap();
        assert!(h.is_hermitian(1e-12));
        let scale = h.matrix().norm();
        for psi in [
            frame.bright.clone(),
            StateVector::level(2),
            StateVector::level(3),
        ] {
            assert!(h.matrix_element(&frame.dark1, &psi).norm() <= 1e-10 * scale);
        }
        for k in 0..=200 {
            let t = k as f64 * m.duration() / 200.0;
            assert!(m.hamiltonian_at(t).unwrap().is_hermitian(1e-12));
        }
    }

    #[test]
    fn rabi_formula() {
        let (w, t) = (2.0 * PI * 1e4, 3.3e-5);
        let m = single_tone_model(w, t);
        let u = propagate_unitary(&m, 1e-11).unwrap();
        let (co, s) = ((w * t / 2.0).cos(), (w * t / 2.0).sin());
        let u = u.matrix();
        assert!((u[(0, 0)] - c(co, 0.0)).norm() < 1e-10);
        assert!((u[(3, 3)] - c(co, 0.0)).norm() < 1e-10);
        assert!((u[(0, 3)] - c(0.0, -s)).norm() < 1e-10);
        assert!((u[(3, 0)] - c(0.0, -s)).norm() < 1e-10);
        assert!((u[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn first_half_maps_bright_to_aux() {
        let m = x_model(4.0);
        let traj = propagate_unitary_trajectory(&m, DEFAULT_TOL).unwrap();
        let half = &traj[m.schedule().segments() / 2];
        let frame = frame_states(FRAC_PI_2, 0.0);
        let d1 = half.apply(&frame.dark1).unwrap();
        assert!(d1.inner(&frame.dark1).norm() > 1.0 - 1e-6);
        assert!((d1.inner(&frame.dark1) - c(1.0, 0.0)).norm() < 1e-6);
        let b = half.apply(&frame.bright).unwrap();
        let target = StateVector::level(3).scaled(-I);
        assert!((b.amplitudes() - target.amplitudes()).norm() < 1e-6);
    }

    #[test]
    fn unitarity_and_dark_state_decoupling() {
        for eta in [0.0, 4.0] {
            let m = x_model(eta);
            let traj = propagate_unitary_trajectory(&m, DEFAULT_TOL).unwrap();
            let frame = frame_states(FRAC_PI_2, 0.0);
            for u in traj.iter().step_by(64) {
                assert!(u.unitarity_defect() <= 1e-8);
                let d = u.apply(&frame.dark1).unwrap();
                assert!((d.amplitudes() - frame.dark1.amplitudes()).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn dark_path_follows_schrodinger_equation() {
        let m = x_model(4.0);
        let lp = m.schedule().loop_schedule();
        let frame = frame_states(FRAC_PI_2, 0.0);
        let d0 = dark_path_state(0.0, &lp, &frame).unwrap();
        assert!((d0.inner(&frame.bright).norm() - 1.0).abs() < 1e-12);
        let mid = dark_path_state(m.duration() / 2.0, &lp, &frame).unwrap();
        assert!((mid.amplitudes() - StateVector::level(3).scaled(-I).amplitudes()).norm() < 1e-12);

        let traj = propagate_unitary_trajectory(&m, DEFAULT_TOL).unwrap();
        for (k, u) in traj.iter().enumerate() {
            let t = m.schedule().time(k);
            let expected = dark_path_state(t, &lp, &frame).unwrap();
            let got = u.apply(&d0).unwrap();
            assert!(expected.inner(&got).norm_sqr() >= 1.0 - 1e-6, "sample {k}");
        }
    }

    #[test]
    fn frame_state_examples() {
        let phi = 0.8;
        let f = frame_states(0.0, phi);
        assert!((f.bright.amplitudes()[1] + C64::from_polar(1.0, phi)).norm() < 1e-15);
        assert!((f.dark1.amplitudes()[0] + C64::from_polar(1.0, -phi)).norm() < 1e-15);
        let f = frame_states(FRAC_PI_2, 0.0);
        assert!((f.bright.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((f.bright.amplitudes()[1] + c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        for k in 0..100 {
            let theta = 0.031 * k as f64 * PI;
            let phi = 0.173 * k as f64;
            let f = frame_states(theta, phi);
            assert!(f.bright.inner(&f.dark1).norm() < 1e-12);
            assert!((f.bright.amplitudes().norm() - 1.0).abs() < 1e-12);
            assert!((f.dark1.amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn x_gate_populations() {
        let m = x_model(4.0);
        let trace = population_trace(&StateVector::level(0), &m, None, DEFAULT_TOL).unwrap();
        let fin = trace.final_populations();
        assert!(fin[1] >= 0.999);
        let mid = trace.populations[m.schedule().segments() / 2];
        assert!((mid[3] - 0.5).abs() < 1e-3);
        assert!((mid[0] - 0.25).abs() < 1e-3);
        assert!((mid[1] - 0.25).abs() < 1e-3);
        for p in &trace.populations {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn identity_loop_returns_populations() {
        // theta = 0 makes |1> the bright state and gamma = 0 closes the loop
        // on it trivially.
        let spec = GateSpec::new(0.0, 0.0, 0.0, 4.0, DriveBudget::PeakRabi(PEAK)).unwrap();
        let m = HamiltonianModel::new(synthesize(&spec, DEFAULT_SAMPLES).unwrap());
        let trace = population_trace(&StateVector::level(1), &m, None, DEFAULT_TOL).unwrap();
        let fin = trace.final_populations();
        assert!((fin[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lindblad_without_noise_matches_unitary() {
        let m = x_model(4.0);
        let psi = StateVector::normalized(CVector::from_vec(vec![
            c(0.6, 0.0),
            c(0.0, 0.8),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]))
        .unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let traj = propagate_lindblad(&rho0, &m, &NoiseModel::noiseless(), DEFAULT_TOL).unwrap();
        let u = propagate_unitary(&m, DEFAULT_TOL).unwrap();
        let expected = rho0.evolve(&u);
        assert!((traj.final_state().matrix() - expected.matrix()).norm() < 1e-8);
    }

    #[test]
    fn pure_dephasing_decay() {
        let spec = GateSpec::new(0.0, 0.0, 0.0, 0.0, DriveBudget::Duration(2e-3)).unwrap();
        let m = HamiltonianModel::new(synthesize(&spec, 100).unwrap().with_constant_tone(1, 0.0));
        let gamma = 700.0;
        let mut z = CMatrix::zeros(4, 4);
        z[(0, 0)] = c(1.0, 0.0);
        z[(1, 1)] = c(-1.0, 0.0);
        let noise = NoiseModel::new(vec![(Operator::new(z).unwrap(), gamma)]).unwrap();
        let plus = StateVector::normalized(CVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]))
        .unwrap();
        let traj = propagate_lindblad(&DensityMatrix::from_pure(&plus), &m, &noise, 1e-10).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let expected = 0.5 * (-2.0 * gamma * t).exp();
            assert!((rho.matrix()[(0, 1)].re - expected).abs() < 1e-9);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-8);
        }

        let mixed = DensityMatrix::maximally_mixed(4);
        let deph = NoiseModel::dephasing(Some(1e-4), 0.0).unwrap();
        let traj = propagate_lindblad(&mixed, &m, &deph, 1e-10).unwrap();
        assert!((traj.final_state().matrix() - mixed.matrix()).norm() < 1e-12);
    }

    #[test]
    fn default_dephasing_sets_coherence_time() {
        let spec = GateSpec::new(0.0, 0.0, 0.0, 0.0, DriveBudget::Duration(1e-3)).unwrap();
        let m = HamiltonianModel::new(synthesize(&spec, 100).unwrap().with_constant_tone(1, 0.0));
        let t2 = 2e-3;
        let noise = NoiseModel::dephasing(Some(t2), 0.0).unwrap();
        let psi = StateVector::normalized(CVector::from_vec(vec![c(1.0, 0.0); 4])).unwrap();
        let traj = propagate_lindblad(&DensityMatrix::from_pure(&psi), &m, &noise, 1e-10).unwrap();
        let rho = traj.final_state().matrix();
        for k in 1..4 {
            assert!((rho[(0, k)].re - 0.25 * (-1e-3 / t2).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn noisy_lindblad_preserves_trace_and_hermiticity() {
        let m = x_model(4.0);
        let noise = NoiseModel::dephasing(Some(1e-3), 50.0).unwrap();
        let traj = propagate_lindblad(
            &DensityMatrix::from_pure(&StateVector::level(0)),
            &m,
            &noise,
            1e-9,
        )
        .unwrap();
        for rho in traj.states.iter().step_by(128) {
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-8);
            assert!((rho.matrix() - rho.matrix().adjoint()).camax() < 1e-8);
            assert!(rho.min_eigenvalue() > -1e-9);
        }
    }

    #[test]
    fn parallel_transport_holds_on_grid() {
        for (theta, phi, gamma) in [
            (FRAC_PI_2, 0.0, PI),
            (PI / 4.0, 0.0, PI),
            (0.0, 0.0, PI / 4.0),
            (0.0, 0.0, FRAC_PI_2),
        ] {
            let spec = GateSpec::new(theta, phi, gamma, 4.0, DriveBudget::PeakRabi(PEAK)).unwrap();
            let m = HamiltonianModel::new(synthesize(&spec, DEFAULT_SAMPLES).unwrap());
            let lp = m.schedule().loop_schedule();
            let frame = frame_states(theta, phi);
            for k in 0..500 {
                let t = (k as f64 + 0.5) * m.duration() / 500.0;
                let h = m.hamiltonian_at(t).unwrap();
                let scale = h.matrix().norm();
                let d2 = dark_path_state(t, &lp, &frame).unwrap();
                for (a, b) in [
                    (&frame.dark1, &frame.dark1),
                    (&frame.dark1, &d2),
                    (&d2, &frame.dark1),
                    (&d2, &d2),
                ] {
                    assert!(h.matrix_element(a, b).norm() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn population_csv_layout() {
        let m = x_model(0.0);
        let trace = population_trace(&StateVector::level(0), &m, None, DEFAULT_TOL).unwrap();
        let csv = trace.to_csv(128);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_s,p0,p1,p2,pa");
        assert_eq!(lines.len(), 1 + 33);
    }
}
