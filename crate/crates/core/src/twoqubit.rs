//! Spin-phonon controlled-phase proposal.
//!
//! The spin qubit `{|0>, |1>}` and the motional qubit `{|0_p>, |1_p>}` form
//! the computational space. A carrier drive on `|a 0_p> <-> |2 0_p>` and a
//! blue sideband on `|a 0_p> <-> |1 1_p>` run the same dark-path loop as the
//! single-qubit gates with `theta = 0`, which gives
//! `diag(1, 1, 1, e^{i gamma})` on the computational block.
//!
//! [`sideband_hamiltonian`] is the single-transition spin-phonon interaction
//! used to check that the blue sideband couples at `eta_p Omega_0`.

use std::f64::consts::PI;

use crate::dynamics::{propagate_hamiltonian, uniform_grid};
use crate::error::{Error, Result};
use crate::gates::{RealizeOptions, RealizedGate};
use crate::pulse::{synthesize, DriveBudget, GateSpec, LoopSchedule, PulseSchedule};
use crate::quantum::{c, level, CMatrix, Operator, C64, I};

/// Trap and drive parameters of the single-transition interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPhononModel {
    pub lamb_dicke: f64,
    /// Trap frequency, rad/s.
    pub trap_freq: f64,
    /// Laser detuning from the carrier, rad/s.
    pub detuning: f64,
    /// Carrier Rabi frequency, rad/s.
    pub rabi: f64,
    pub phase: f64,
    /// Number of Fock states kept.
    pub fock_dim: usize,
}

impl SpinPhononModel {
    /// `eta_p = 0.1`, `nu = 2 pi 2.4 MHz`, `N = 5`.
    pub fn ion_defaults(rabi: f64, detuning: f64) -> Self {
        Self {
            lamb_dicke: 0.1,
            trap_freq: 2.0 * PI * 2.4e6,
            detuning,
            rabi,
            phase: 0.0,
            fock_dim: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lamb_dicke > 0.0) {
            return Err(Error::InvalidConfig(
                "Lamb-Dicke parameter must be positive".into(),
            ));
        }
        if self.fock_dim < 2 {
            return Err(Error::InvalidConfig(
                "Fock truncation must keep at least 2 states".into(),
            ));
        }
        if !(self.trap_freq > 0.0 && self.rabi.is_finite() && self.detuning.is_finite()) {
            return Err(Error::InvalidConfig(
                "trap frequency must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    /// Index of `|spin, n>` with spin as the slow index (`0 = g`, `1 = e`).
    pub fn index(&self, spin: usize, n: usize) -> usize {
        spin * self.fock_dim + n
    }
}

/// `H(t) = (Omega_0/2) sigma_+ {1 + i eta_p (a e^{-i nu t} + a^dagger e^{i nu t})}
/// e^{i(phi_p - delta t)} + h.c.` on spin (x) Fock space, hbar = 1.
pub fn sideband_hamiltonian(model: &SpinPhononModel, t: f64) -> Operator {
    let n = model.fock_dim;
    let mut coupling = CMatrix::identity(n, n);
    let fwd = C64::from_polar(1.0, -model.trap_freq * t);
    for k in 1..n {
        let amp = c((k as f64).sqrt(), 0.0);
        // a |k> = sqrt(k) |k-1>, a^dagger |k-1> = sqrt(k) |k>
        coupling[(k - 1, k)] += I * model.lamb_dicke * amp * fwd;
        coupling[(k, k - 1)] += I * model.lamb_dicke * amp * fwd.conj();
    }
    let drive = C64::from_polar(model.rabi / 2.0, model.phase - model.detuning * t);
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    // sigma_+ = |e><g| places the block at (e, g).
    let block = coupling * drive;
    h.view_mut((n, 0), (n, n)).copy_from(&block);
    h.view_mut((0, n), (n, n)).copy_from(&block.adjoint());
    Operator::from_matrix_unchecked(h)
}

/// Populations of every `|spin, n>` along a sideband evolution.
#[derive(Debug, Clone)]
pub struct SidebandTrace {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
}

impl SidebandTrace {
    pub fn series(&self, index: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[index]).collect()
    }

    /// Largest population reached in the highest kept Fock level.
    pub fn max_top_fock(&self, model: &SpinPhononModel) -> f64 {
        let top = model.fock_dim - 1;
        self.populations
            .iter()
            .map(|p| p[model.index(0, top)] + p[model.index(1, top)])
            .fold(0.0, f64::max)
    }
}

/// Evolves `|spin, n>` under [`sideband_hamiltonian`] and records
/// populations at `points` evenly spaced times in `[0, duration]`.
pub fn simulate_sideband(
    model: &SpinPhononModel,
    initial: (usize, usize),
    duration: f64,
    points: usize,
    tol: f64,
) -> Result<SidebandTrace> {
    model.validate()?;
    let d = model.dim();
    let mut psi = CMatrix::zeros(d, 1);
    psi[(model.index(initial.0, initial.1), 0)] = c(1.0, 0.0);
    // Resolve the fastest phase rotation (trap or detuning) with ~16 grid
    // points per cycle; the integrator subdivides further as needed.
    let fastest = model.trap_freq + model.detuning.abs() + model.rabi;
    let per_point = ((fastest * duration / (points - 1) as f64) / (2.0 * PI / 16.0))
        .ceil()
        .max(1.0) as usize;
    let grid = uniform_grid(0.0, duration, (points - 1) * per_point);
    let (_, snaps) = propagate_hamiltonian(
        |t| sideband_hamiltonian(model, t).into_matrix(),
        &grid,
        &psi,
        tol,
        true,
    )?;
    let times = (0..points).map(|k| grid[k * per_point]).collect();
    let populations = (0..points)
        .map(|k| snaps[k * per_point].iter().map(|a| a.norm_sqr()).collect())
        .collect();
    Ok(SidebandTrace { times, populations })
}

/// Angular frequency `w` of the best least-squares fit
/// `y(t) = c0 + c1 cos(w t) + c2 sin(w t)` with `w` in `[w_min, w_max]`.
pub fn fit_oscillation_frequency(times: &[f64], values: &[f64], w_min: f64, w_max: f64) -> f64 {
    let residual = |w: f64| {
        let rows: Vec<[f64; 3]> = times
            .iter()
            .map(|&t| [1.0, (w * t).cos(), (w * t).sin()])
            .collect();
        let a = nalgebra::DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
        let y = nalgebra::DVector::from_column_slice(values);
        let coef = a
            .clone()
            .svd(true, true)
            .solve(&y, 1e-14)
            .unwrap_or_else(|_| nalgebra::DVector::zeros(3));
        (y - a * coef).norm_squared()
    };
    let scan = 2000;
    let step = (w_max - w_min) / scan as f64;
    let (mut best_w, mut best_r) = (w_min, residual(w_min));
    for k in 1..=scan {
        let w = w_min + k as f64 * step;
        let r = residual(w);
        if r < best_r {
            best_r = r;
            best_w = w;
        }
    }
    let (mut lo, mut hi) = ((best_w - step).max(w_min), (best_w + step).min(w_max));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if residual(x1) < residual(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    0.5 * (lo + hi)
}

/// Basis of the effective controlled-phase model.
pub struct CzSubspace;

impl CzSubspace {
    pub const LABELS: [&'static str; 6] = ["00", "01", "10", "11", "a0", "20"];
    pub const COMPUTATIONAL: [usize; 4] = [0, 1, 2, 3];
    pub const Q11: usize = 3;
    pub const A0: usize = 4;
    pub const TWO0: usize = 5;
    pub const DIM: usize = 6;
}

/// `H(t) = 1/2 Omega_1(t) e^{-i phi(t)} |11_p><a0_p| + 1/2 Omega_2(t) |20_p><a0_p| + h.c.`
/// with `Omega_1, Omega_2` from the dark-path loop at `theta = 0`.
pub fn effective_cz_hamiltonian(lp: &LoopSchedule, t: f64) -> Result<Operator> {
    let (w1, w2) = lp.amplitudes(t)?;
    Ok(Operator::from_matrix_unchecked(cz_matrix(
        w1,
        w2,
        lp.phase_at(t),
    )))
}

fn cz_matrix(w1: f64, w2: f64, phi: f64) -> CMatrix {
    let mut h = CMatrix::zeros(CzSubspace::DIM, CzSubspace::DIM);
    let v1 = C64::from_polar(w1 / 2.0, -phi);
    let v2 = c(w2 / 2.0, 0.0);
    h[(CzSubspace::Q11, CzSubspace::A0)] = v1;
    h[(CzSubspace::A0, CzSubspace::Q11)] = v1.conj();
    h[(CzSubspace::TWO0, CzSubspace::A0)] = v2;
    h[(CzSubspace::A0, CzSubspace::TWO0)] = v2.conj();
    h
}

/// Single-qubit loop whose schedule drives the controlled-phase model.
///
/// With `theta = 0` the bright state is `-e^{i phi}|1>`; choosing `phi = pi`
/// makes it `|1>` and puts the bright-tone phase `phi_1` equal to the loop
/// phase `phi_0`, so the `|1>` tone maps onto the `|11_p> <-> |a0_p>` sideband.
pub fn cz_loop_spec(gamma: f64, eta: f64, budget: DriveBudget) -> Result<GateSpec> {
    GateSpec::new(0.0, PI, gamma, eta, budget)
}

/// Hamiltonian of the controlled-phase model driven by a sampled schedule.
pub fn cz_hamiltonian_from_schedule(schedule: &PulseSchedule, t: f64) -> Result<Operator> {
    let amps = schedule.amplitudes_at(t)?;
    let phases = schedule.phases_at(t)?;
    Ok(Operator::from_matrix_unchecked(cz_matrix(
        amps[1], amps[2], phases[1],
    )))
}

#[derive(Debug, Clone)]
pub struct CzGate {
    /// Propagator restricted to `(|00_p>, |01_p>, |10_p>, |11_p>)`.
    pub block: CMatrix,
    pub leakage: f64,
    pub full_propagator: Operator,
    pub duration: f64,
}

impl CzGate {
    /// CSV of the 4x4 block: `row, col, re, im`, plus a leakage line.
    pub fn to_csv(&self) -> String {
        use crate::pulse::fmt_sig;
        let mut out = String::from("row,col,re,im\n");
        for r in 0..4 {
            for col in 0..4 {
                let v = self.block[(r, col)];
                out.push_str(&format!("{r},{col},{},{}\n", fmt_sig(v.re), fmt_sig(v.im)));
            }
        }
        out
    }
}

/// Simulates the controlled-phase loop and returns the computational block.
pub fn controlled_phase_gate(
    gamma: f64,
    eta: f64,
    budget: DriveBudget,
    opts: &RealizeOptions,
) -> Result<CzGate> {
    let spec = cz_loop_spec(gamma, eta, budget)?;
    let schedule = synthesize(&spec, opts.n_samples)?;
    let grid = schedule.times();
    let (u, _) = propagate_hamiltonian(
        |t| {
            cz_hamiltonian_from_schedule(&schedule, t.clamp(0.0, schedule.duration()))
                .expect("clamped")
                .into_matrix()
        },
        &grid,
        &CMatrix::identity(CzSubspace::DIM, CzSubspace::DIM),
        opts.tol,
        false,
    )?;
    let block = u.view((0, 0), (4, 4)).into_owned();
    let smin = block
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(CzGate {
        block,
        leakage: (1.0 - smin * smin).clamp(0.0, 1.0),
        full_propagator: Operator::from_matrix_unchecked(u),
        duration: schedule.duration(),
    })
}

/// Maps the single-qubit `{|1>, |2>, |a>}` propagator block onto
/// `{|11_p>, |20_p>, |a0_p>}` for comparison with the two-qubit model.
pub fn embed_single_qubit_block(gate: &RealizedGate) -> CMatrix {
    let map = [
        (level::ONE, CzSubspace::Q11),
        (level::TWO, CzSubspace::TWO0),
        (level::AUX, CzSubspace::A0),
    ];
    let u = gate.full_propagator.matrix();
    let mut out = CMatrix::identity(CzSubspace::DIM, CzSubspace::DIM);
    for &(si, ci) in &map {
        for &(sj, cj) in &map {
            out[(ci, cj)] = u[(si, sj)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::realize;
    use crate::pulse::control_amplitudes;

    const PEAK: f64 = 2.0 * PI * 1e4;

    #[test]
    fn sideband_hamiltonian_is_hermitian() {
        let m = SpinPhononModel::ion_defaults(2.0 * PI * 1e5, 2.0 * PI * 2.4e6);
        for k in 0..20 {
            let h = sideband_hamiltonian(&m, k as f64 * 1.3e-7);
            assert!(h.is_hermitian(1e-12));
            assert_eq!(h.dim(), 10);
        }
    }

    #[test]
    fn carrier_rabi_independent_of_fock_number() {
        let mut m = SpinPhononModel::ion_defaults(2.0 * PI * 5e4, 0.0);
        m.lamb_dicke = 1e-9;
        let period = 2.0 * PI / m.rabi;
        for n in 0..3 {
            let tr = simulate_sideband(&m, (0, n), 1.5 * period, 301, 1e-9).unwrap();
            let w = fit_oscillation_frequency(
                &tr.times,
                &tr.series(m.index(1, n)),
                0.5 * m.rabi,
                1.5 * m.rabi,
            );
            assert!(((w - m.rabi) / m.rabi).abs() < 1e-3, "n = {n}: {w}");
        }
    }

    #[test]
    fn red_sideband_from_ground_does_nothing() {
        let nu = 2.0 * PI * 2.4e6;
        let m = SpinPhononModel::ion_defaults(nu / 20.0, -nu);
        let period = 2.0 * PI / (m.lamb_dicke * m.rabi);
        let tr = simulate_sideband(&m, (0, 0), period, 201, 1e-8).unwrap();
        let ground = tr.series(m.index(0, 0));
        let transfer = ground.iter().map(|p| 1.0 - p).fold(0.0, f64::max);
        assert!(transfer < 1e-2, "transfer {transfer}");
    }

    #[test]
    fn fit_recovers_known_frequency() {
        let w = 7.3;
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|&t| 0.5 - 0.5 * (w * t).cos()).collect();
        let got = fit_oscillation_frequency(&t, &y, 1.0, 20.0);
        assert!((got - w).abs() < 1e-6);
    }

    #[test]
    fn effective_hamiltonian_structure() {
        let lp = LoopSchedule::new(4.8e-4, 4.0, PI);
        let h0 = effective_cz_hamiltonian(&lp, 0.0).unwrap();
        assert!(h0.matrix().norm() == 0.0);
        for k in 0..50 {
            let t = k as f64 * lp.duration / 49.0;
            let h = effective_cz_hamiltonian(&lp, t).unwrap();
            assert!(h.is_hermitian(1e-15));
            for s in 0..3 {
                assert!(h.matrix().row(s).iter().all(|v| v.norm() == 0.0));
                assert!(h.matrix().column(s).iter().all(|v| v.norm() == 0.0));
            }
        }
        let t = lp.duration / 4.0;
        let h = effective_cz_hamiltonian(&lp, t).unwrap();
        let (w, w2) = control_amplitudes(t, lp.duration, 4.0).unwrap();
        assert!(
            (h.matrix()[(CzSubspace::Q11, CzSubspace::A0)].norm() - w.abs() / 2.0).abs()
                < 1e-12 * w.abs()
        );
        assert!(
            (h.matrix()[(CzSubspace::TWO0, CzSubspace::A0)].re - w2 / 2.0).abs() < 1e-12 * w2.abs()
        );
    }

    #[test]
    fn controlled_z() {
        let g = controlled_phase_gate(
            PI,
            4.0,
            DriveBudget::PeakRabi(PEAK),
            &RealizeOptions::default(),
        )
        .unwrap();
        let cz = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ]));
        assert!((&g.block - cz).camax() < 1e-4);
        assert!(g.leakage <= 1e-6);
        for s in 0..3 {
            let col = g.full_propagator.matrix().column(s);
            for r in 0..CzSubspace::DIM {
                let expected = if r == s { 1.0 } else { 0.0 };
                assert_eq!(col[r], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn zero_phase_is_identity() {
        let g = controlled_phase_gate(
            0.0,
            4.0,
            DriveBudget::PeakRabi(PEAK),
            &RealizeOptions::default(),
        )
        .unwrap();
        assert!((&g.block - CMatrix::identity(4, 4)).camax() < 1e-6);
    }

    #[test]
    fn matches_single_qubit_theta_zero_loop() {
        let gamma = 1.2;
        let opts = RealizeOptions::default();
        let budget = DriveBudget::PeakRabi(PEAK);
        let cz = controlled_phase_gate(gamma, 4.0, budget, &opts).unwrap();
        let single = realize(&cz_loop_spec(gamma, 4.0, budget).unwrap(), &opts).unwrap();
        let embedded = embed_single_qubit_block(&single);
        assert!((cz.full_propagator.matrix() - embedded).camax() < 1e-8);
    }

    #[test]
    fn three_level_loop_gives_opposite_phases() {
        let gamma = 0.9;
        let g = controlled_phase_gate(
            gamma,
            0.0,
            DriveBudget::PeakRabi(PEAK),
            &RealizeOptions::default(),
        )
        .unwrap();
        let u = g.full_propagator.matrix();
        assert!(
            (u[(CzSubspace::Q11, CzSubspace::Q11)] - C64::from_polar(1.0, gamma)).norm() < 1e-6
        );
        assert!((u[(CzSubspace::A0, CzSubspace::A0)] - C64::from_polar(1.0, -gamma)).norm() < 1e-6);
    }
}
