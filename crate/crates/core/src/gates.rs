//! Holonomic gates: closed-form targets, the named gate set, and end-to-end
//! realization through pulse synthesis and propagation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{
    lindblad_superoperator, propagate_unitary, HamiltonianModel, NoiseModel, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::pulse::{synthesize, DriveBudget, GateSpec, PulseSchedule, DEFAULT_SAMPLES};
use crate::quantum::{c, level, paulis, trace_overlap, CMatrix, Operator, QubitChannel, C64};

/// The single-qubit gates demonstrated on the ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateName {
    X,
    H,
    T,
    S,
}

impl GateName {
    pub const ALL: [GateName; 4] = [GateName::X, GateName::H, GateName::T, GateName::S];

    /// `(theta, phi, gamma)` of the loop realizing this gate.
    pub fn angles(self) -> (f64, f64, f64) {
        match self {
            GateName::X => (FRAC_PI_2, 0.0, PI),
            GateName::H => (FRAC_PI_4, 0.0, PI),
            GateName::T => (0.0, 0.0, FRAC_PI_4),
            GateName::S => (0.0, 0.0, FRAC_PI_2),
        }
    }

    pub fn target(self) -> Operator {
        let (t, p, g) = self.angles();
        target_unitary(t, p, g)
    }

    pub fn spec(self, eta: f64, budget: DriveBudget) -> Result<GateSpec> {
        let (t, p, g) = self.angles();
        GateSpec::new(t, p, g, eta, budget)
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateName::X => "X",
            GateName::H => "H",
            GateName::T => "T",
            GateName::S => "S",
        };
        f.write_str(s)
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(GateName::X),
            "H" => Ok(GateName::H),
            "T" => Ok(GateName::T),
            "S" => Ok(GateName::S),
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }
}

/// Spec of a named gate with the caller's `eta` and drive budget.
pub fn named_gate(name: &str, eta: f64, budget: DriveBudget) -> Result<GateSpec> {
    name.parse::<GateName>()?.spec(eta, budget)
}

/// `U(theta, phi, gamma) = e^{i gamma/2} exp(-i gamma/2 n.sigma)` with
/// `n = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))`.
pub fn target_unitary(theta: f64, phi: f64, gamma: f64) -> Operator {
    let n = [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ];
    let ps = paulis();
    let (s, co) = (gamma / 2.0).sin_cos();
    let n_sigma = &ps[1] * c(n[0], 0.0) + &ps[2] * c(n[1], 0.0) + &ps[3] * c(n[2], 0.0);
    let rot = &ps[0] * c(co, 0.0) - n_sigma * c(0.0, s);
    Operator::from_matrix_unchecked(rot * C64::from_polar(1.0, gamma / 2.0))
}

/// Axis-angle parameters `(theta, phi, gamma)` with `gamma` in `[0, pi]`
/// such that `target_unitary(theta, phi, gamma)` equals `u` up to a global
/// phase. The identity maps to `(0, 0, 0)`.
pub fn rotation_angles(u: &CMatrix) -> (f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u / det.sqrt();
    let ps = paulis();
    let mut a0 = (v.trace() / 2.0).re;
    // a_k = i Tr(V sigma_k) / 2 for V = a0 I - i a.sigma
    let mut a: [f64; 3] = std::array::from_fn(|k| ((&v * &ps[k + 1]).trace() * c(0.0, 0.5)).re);
    if a0 < 0.0 {
        a0 = -a0;
        a.iter_mut().for_each(|x| *x = -*x);
    }
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let gamma = 2.0 * norm.atan2(a0);
    if norm < 1e-12 {
        return (0.0, 0.0, 0.0);
    }
    let theta = (a[2] / norm).clamp(-1.0, 1.0).acos();
    let phi = if a[0].abs() < 1e-15 && a[1].abs() < 1e-15 {
        0.0
    } else {
        a[1].atan2(a[0])
    };
    (theta, phi, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizeOptions {
    pub n_samples: usize,
    pub tol: f64,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
        }
    }
}

/// Simulated loop propagator and its action on the qubit.
#[derive(Debug, Clone)]
pub struct RealizedGate {
    /// Propagator restricted to `{|0>, |1>}`.
    pub qubit_block: CMatrix,
    /// `1 - s_min^2` for the smallest singular value `s_min` of the block.
    pub leakage: f64,
    pub full_propagator: Operator,
    pub duration: f64,
}

impl RealizedGate {
    fn from_propagator(u: Operator, duration: f64) -> Self {
        let block = u.matrix().view((0, 0), (2, 2)).into_owned();
        let smin = block
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        Self {
            qubit_block: block,
            leakage: (1.0 - smin * smin).clamp(0.0, 1.0),
            full_propagator: u,
            duration,
        }
    }

    pub fn channel(&self) -> QubitChannel {
        QubitChannel::from_kraus(&self.qubit_block)
    }
}

/// Synthesizes and simulates `spec` without decoherence.
pub fn realize(spec: &GateSpec, opts: &RealizeOptions) -> Result<RealizedGate> {
    let schedule = synthesize(spec, opts.n_samples)?;
    realize_schedule(&schedule, opts.tol)
}

/// Simulates an already-built (possibly miscalibrated) schedule.
pub fn realize_schedule(schedule: &PulseSchedule, tol: f64) -> Result<RealizedGate> {
    let model = HamiltonianModel::new(schedule.clone());
    let u = propagate_unitary(&model, tol)?;
    Ok(RealizedGate::from_propagator(u, schedule.duration()))
}

/// Qubit channel of a schedule under optional Lindblad noise. Without noise
/// this is the single-Kraus map of the restricted propagator.
pub fn realize_channel(
    schedule: &PulseSchedule,
    noise: Option<&NoiseModel>,
    tol: f64,
) -> Result<QubitChannel> {
    match noise.filter(|n| !n.is_noiseless()) {
        None => Ok(realize_schedule(schedule, tol)?.channel()),
        Some(noise) => {
            let model = HamiltonianModel::new(schedule.clone());
            let superop = lindblad_superoperator(&model, noise, tol)?;
            QubitChannel::restrict(&superop, level::DIM)
        }
    }
}

/// Phase-insensitive overlap `|Tr(V^dagger M)| / 2` of the realized qubit
/// block with the target.
pub fn gate_fidelity(gate: &RealizedGate, target: &Operator) -> Result<f64> {
    if target.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: target.dim(),
        });
    }
    Ok(trace_overlap(target.matrix(), &gate.qubit_block))
}

/// Average gate fidelity of a (possibly noisy, possibly leaky) channel.
pub fn channel_fidelity(channel: &QubitChannel, target: &Operator) -> Result<f64> {
    channel.average_fidelity(target)
}
