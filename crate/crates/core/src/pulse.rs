//! Three-tone drive synthesis for single-loop holonomic gates.
//!
//! The loop follows the dark path parameterized by
//! `alpha(t) = (pi/2) sin^2(pi t / T)` and `beta(t) = eta (1 - cos alpha(t))`.
//! The bright-state drive `Omega` and the auxiliary drive `Omega_2` are
//! inverse-engineered from these angles. Within the first half of the loop
//! the bright tones carry `phi_0 = 0`; in the second half both bright tones
//! are shifted by `-gamma`, which imprints the holonomy on `|b>`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Default number of time intervals per loop.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Points in the coarse scan of the dimensionless peak drive.
const PEAK_SCAN_POINTS: usize = 1 << 14;

/// How the available drive strength is spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveBudget {
    /// Fixed loop duration in seconds.
    Duration(f64),
    /// Peak composite bright-state Rabi frequency `sqrt(Omega_0^2 + Omega_1^2)` in rad/s.
    PeakRabi(f64),
    /// Peak over each physical tone `|Omega_0|, |Omega_1|, |Omega_2|` in rad/s.
    PeakRabiPerTone(f64),
}

/// Parameters of one holonomic loop `U(theta, phi, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub theta: f64,
    pub phi: f64,
    pub gamma: f64,
    pub eta: f64,
    pub budget: DriveBudget,
}

impl GateSpec {
    pub fn new(theta: f64, phi: f64, gamma: f64, eta: f64, budget: DriveBudget) -> Result<Self> {
        let spec = Self {
            theta,
            phi,
            gamma,
            eta,
            budget,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta", self.theta),
            ("phi", self.phi),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} is not finite")));
            }
        }
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "eta must be finite and >= 0, got {}",
                self.eta
            )));
        }
        let (label, value) = match self.budget {
            DriveBudget::Duration(t) => ("duration", t),
            DriveBudget::PeakRabi(w) | DriveBudget::PeakRabiPerTone(w) => {
                ("peak Rabi frequency", w)
            }
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "{label} must be positive, got {value}"
            )));
        }
        Ok(())
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn with_budget(self, budget: DriveBudget) -> Self {
        Self { budget, ..self }
    }

    /// Loop duration implied by the drive budget.
    pub fn duration(&self) -> f64 {
        match self.budget {
            DriveBudget::Duration(t) => t,
            DriveBudget::PeakRabi(w) => solve_duration(w, self.eta),
            DriveBudget::PeakRabiPerTone(w) => solve_duration_per_tone(w, self.eta, self.theta),
        }
    }
}

fn check_time(t: f64, duration: f64) -> Result<f64> {
    let slack = 1e-12 * duration;
    if !(t >= -slack && t <= duration + slack) || !t.is_finite() {
        return Err(Error::TimeOutOfRange { t, duration });
    }
    Ok(t.clamp(0.0, duration))
}

/// `alpha(t) = (pi/2) sin^2(pi t / T)`.
pub fn alpha_of(t: f64, duration: f64) -> Result<f64> {
    let t = check_time(t, duration)?;
    Ok(alpha_dimless(t / duration))
}

/// `beta(t) = eta (1 - cos alpha(t))`.
pub fn beta_of(t: f64, duration: f64, eta: f64) -> Result<f64> {
    let t = check_time(t, duration)?;
    Ok(beta_dimless(t / duration, eta))
}

/// Bright-state and auxiliary drive amplitudes `(Omega, Omega_2)` in rad/s.
///
/// Substituting `beta' = eta sin(alpha) alpha'` into the inverse-engineering
/// relations cancels the `cot(alpha)` factor, giving
/// `Omega = 2 alpha' (eta cos(alpha) sin(beta) + cos(beta))` and
/// `Omega_2 = 2 alpha' (eta cos(alpha) cos(beta) - sin(beta))`,
/// finite on the whole loop.
pub fn control_amplitudes(t: f64, duration: f64, eta: f64) -> Result<(f64, f64)> {
    let t = check_time(t, duration)?;
    let (w, w2) = amplitudes_dimless(t / duration, eta);
    Ok((w / duration, w2 / duration))
}

fn alpha_dimless(tau: f64) -> f64 {
    let s = (PI * tau).sin();
    FRAC_PI_2 * s * s
}

fn beta_dimless(tau: f64, eta: f64) -> f64 {
    eta * (1.0 - alpha_dimless(tau).cos())
}

/// `T * d(alpha)/dt` as a function of `tau = t / T`.
fn alpha_rate_dimless(tau: f64) -> f64 {
    0.5 * PI * PI * (2.0 * PI * tau).sin()
}

/// `(Omega T, Omega_2 T)` at `tau = t / T`.
fn amplitudes_dimless(tau: f64, eta: f64) -> (f64, f64) {
    let a = alpha_dimless(tau);
    let b = eta * (1.0 - a.cos());
    let ad = alpha_rate_dimless(tau);
    let (sb, cb) = b.sin_cos();
    let ca = a.cos();
    (
        2.0 * ad * (eta * ca * sb + cb),
        2.0 * ad * (eta * ca * cb - sb),
    )
}

/// Maximizes `f` on `[0, 1]`: dense scan followed by golden-section
/// refinement around the best scan point.
fn maximize_unit_interval(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    let h = 1.0 / points as f64;
    let (mut best_k, mut best) = (0usize, f(0.0));
    for k in 1..=points {
        let v = f(k as f64 * h);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let (mut lo, mut hi) = (
        (best_k as f64 - 1.0).max(0.0) * h,
        (best_k as f64 + 1.0).min(points as f64) * h,
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    best.max(f1).max(f2)
}

/// Dimensionless composite peak `P(eta) = max_t |Omega(t)| T`.
pub fn composite_peak(eta: f64) -> f64 {
    peak_with_grid(eta, PEAK_SCAN_POINTS)
}

fn peak_with_grid(eta: f64, points: usize) -> f64 {
    maximize_unit_interval(|tau| amplitudes_dimless(tau, eta).0.abs(), points)
}

/// Loop duration at which the composite bright drive peaks at `peak_rabi`.
pub fn solve_duration(peak_rabi: f64, eta: f64) -> f64 {
    composite_peak(eta) / peak_rabi
}

/// Loop duration at which the strongest single tone peaks at `peak_rabi`.
pub fn solve_duration_per_tone(peak_rabi: f64, eta: f64, theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    let peak = maximize_unit_interval(
        |tau| {
            let (w, w2) = amplitudes_dimless(tau, eta);
            (w * s).abs().max((w * c).abs()).max(w2.abs())
        },
        PEAK_SCAN_POINTS,
    );
    peak / peak_rabi
}

/// Splits the composite bright drive into the `|0>` and `|1>` tones:
/// returns `(Omega_0, Omega_1, phi_1)` with `Omega_0 / Omega_1 = tan(theta/2)`
/// and `phi = phi_0 - phi_1 + pi`.
pub fn split_bright(omega: f64, theta: f64, phi: f64, phi0: f64) -> (f64, f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (omega * s, omega * c, phi0 - phi + PI)
}

/// The path angles and interval phases of one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSchedule {
    pub duration: f64,
    pub eta: f64,
    /// `phi_0` on `[0, T/2]`.
    pub phase_first: f64,
    /// `phi_0'` on `(T/2, T]`, equal to `-gamma`.
    pub phase_second: f64,
}

impl LoopSchedule {
    pub fn new(duration: f64, eta: f64, gamma: f64) -> Self {
        Self {
            duration,
            eta,
            phase_first: 0.0,
            phase_second: -gamma,
        }
    }

    pub fn alpha(&self, t: f64) -> Result<f64> {
        alpha_of(t, self.duration)
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        beta_of(t, self.duration, self.eta)
    }

    pub fn amplitudes(&self, t: f64) -> Result<(f64, f64)> {
        control_amplitudes(t, self.duration, self.eta)
    }

    /// Bright-tone phase `phi_0` in effect at `t`.
    pub fn phase_at(&self, t: f64) -> f64 {
        if t <= 0.5 * self.duration {
            self.phase_first
        } else {
            self.phase_second
        }
    }
}

/// Sampled three-tone drive on a uniform grid over one loop.
///
/// Amplitudes are signed reals; phases are constant on each half of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    spec: GateSpec,
    duration: f64,
    segments: usize,
    omega: [Vec<f64>; 3],
    /// `[phi_0, phi_1, phi_2]` on the first and second half.
    phases: [[f64; 3]; 2],
}

impl PulseSchedule {
    pub fn spec(&self) -> &GateSpec {
        &self.spec
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Number of sampling intervals; there are `segments + 1` samples.
    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.segments as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.segments).map(|k| self.time(k)).collect()
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.segments {
            self.duration
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn omega(&self, tone: usize) -> &[f64] {
        &self.omega[tone]
    }

    pub fn interval_phases(&self) -> [[f64; 3]; 2] {
        self.phases
    }

    pub fn loop_schedule(&self) -> LoopSchedule {
        LoopSchedule::new(self.duration, self.spec.eta, self.spec.gamma)
    }

    /// Phases attached to sample `k`; the midpoint sample belongs to the
    /// first half.
    pub fn sample_phases(&self, k: usize) -> [f64; 3] {
        if 2 * k <= self.segments {
            self.phases[0]
        } else {
            self.phases[1]
        }
    }

    /// Amplitudes linearly interpolated at `t`.
    pub fn amplitudes_at(&self, t: f64) -> Result<[f64; 3]> {
        let t = check_time(t, self.duration)?;
        let x = t / self.dt();
        let k = (x.floor() as usize).min(self.segments - 1);
        let w = x - k as f64;
        Ok(std::array::from_fn(|j| {
            (1.0 - w) * self.omega[j][k] + w * self.omega[j][k + 1]
        }))
    }

    /// Phases in effect at `t`: first-half values on `[0, T/2]`, second-half
    /// values on `(T/2, T]`.
    pub fn phases_at(&self, t: f64) -> Result<[f64; 3]> {
        let t = check_time(t, self.duration)?;
        Ok(if t <= 0.5 * self.duration {
            self.phases[0]
        } else {
            self.phases[1]
        })
    }

    /// Same grid and phases with only `tone` driven, at a constant amplitude.
    #[cfg(test)]
    pub(crate) fn with_constant_tone(&self, tone: usize, omega: f64) -> PulseSchedule {
        let mut out = self.clone();
        for (j, v) in out.omega.iter_mut().enumerate() {
            let w = if j == tone { omega } else { 0.0 };
            v.iter_mut().for_each(|x| *x = w);
        }
        out
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.omega
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &w| m.max(w.abs()))
    }

    /// Peak of the composite bright drive `sqrt(Omega_0^2 + Omega_1^2)`.
    pub fn peak_composite(&self) -> f64 {
        self.omega[0]
            .iter()
            .zip(&self.omega[1])
            .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// CSV with columns `t_s, omega0_rad_s, omega1_rad_s, omega2_rad_s,
    /// phi0_rad, phi1_rad, phi2_rad`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t_s,omega0_rad_s,omega1_rad_s,omega2_rad_s,phi0_rad,phi1_rad,phi2_rad\n");
        for k in 0..=self.segments {
            let p = self.sample_phases(k);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_sig(self.time(k)),
                fmt_sig(self.omega[0][k]),
                fmt_sig(self.omega[1][k]),
                fmt_sig(self.omega[2][k]),
                fmt_sig(p[0]),
                fmt_sig(p[1]),
                fmt_sig(p[2]),
            );
        }
        out
    }
}

/// Scientific notation with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Builds the full two-interval schedule realizing `spec`.
pub fn synthesize(spec: &GateSpec, n_samples: usize) -> Result<PulseSchedule> {
    spec.validate()?;
    if n_samples < 100 || !n_samples.is_multiple_of(2) {
        return Err(Error::InvalidSpec(format!(
            "n_samples must be even and >= 100, got {n_samples}"
        )));
    }
    let duration = spec.duration();
    let phi0 = 0.0;
    let (_, _, phi1) = split_bright(1.0, spec.theta, spec.phi, phi0);
    let phases = [
        [phi0, phi1, 0.0],
        [phi0 - spec.gamma, phi1 - spec.gamma, 0.0],
    ];

    let mut omega = [
        Vec::with_capacity(n_samples + 1),
        Vec::with_capacity(n_samples + 1),
        Vec::with_capacity(n_samples + 1),
    ];
    for k in 0..=n_samples {
        let tau = k as f64 / n_samples as f64;
        let (w, w2) = amplitudes_dimless(tau, spec.eta);
        let (w0, w1, _) = split_bright(w / duration, spec.theta, spec.phi, phi0);
        omega[0].push(w0);
        omega[1].push(w1);
        omega[2].push(w2 / duration);
    }
    Ok(PulseSchedule {
        spec: *spec,
        duration,
        segments: n_samples,
        omega,
        phases,
    })
}

/// Scales every tone amplitude by `1 + epsilon`.
pub fn inject_rabi_error(schedule: &PulseSchedule, epsilon: f64) -> PulseSchedule {
    let scale = 1.0 + epsilon;
    let mut out = schedule.clone();
    for tone in out.omega.iter_mut() {
        tone.iter_mut().for_each(|w| *w *= scale);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PEAK: f64 = 2.0 * PI * 1e4;

    /// Inverse-engineering relations with the explicit `cot(alpha)` factor and
    /// `beta'` from a central finite difference; only valid away from
    /// `sin(alpha) = 0`.
    fn raw_amplitudes(t: f64, duration: f64, eta: f64) -> (f64, f64) {
        let h = duration * 1e-6;
        let a = alpha_of(t, duration).unwrap();
        let b = beta_of(t, duration, eta).unwrap();
        let ad =
            (alpha_of(t + h, duration).unwrap() - alpha_of(t - h, duration).unwrap()) / (2.0 * h);
        let bd = (beta_of(t + h, duration, eta).unwrap() - beta_of(t - h, duration, eta).unwrap())
            / (2.0 * h);
        let cot = a.cos() / a.sin();
        (
            2.0 * (bd * cot * b.sin() + ad * b.cos()),
            2.0 * (bd * cot * b.cos() - ad * b.sin()),
        )
    }

    #[test]
    fn alpha_examples() {
        let t = 1e-3;
        assert_eq!(alpha_of(0.0, t).unwrap(), 0.0);
        assert!((alpha_of(t / 2.0, t).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((alpha_of(t / 4.0, t).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(alpha_of(t, t).unwrap().abs() < 1e-12);
        assert!(matches!(
            alpha_of(1.1 * t, t),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            alpha_of(-1e-6, t),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn beta_examples() {
        let t = 1e-3;
        assert_eq!(beta_of(0.0, t, 4.0).unwrap(), 0.0);
        assert!((beta_of(t / 2.0, t, 4.0).unwrap() - 4.0).abs() < 1e-15);
        for k in 0..=10 {
            assert_eq!(beta_of(k as f64 * t / 10.0, t, 0.0).unwrap(), 0.0);
        }
        assert!(beta_of(2.0 * t, t, 4.0).is_err());
    }

    #[test]
    fn control_amplitude_examples() {
        let t = 4.8e-4;
        let (w, w2) = control_amplitudes(0.0, t, 4.0).unwrap();
        assert_eq!((w, w2), (0.0, 0.0));
        for k in 1..10 {
            let tk = k as f64 * t / 10.0;
            let (w, w2) = control_amplitudes(tk, t, 0.0).unwrap();
            let ad = PI * PI / (2.0 * t) * (2.0 * PI * tk / t).sin();
            assert!((w - 2.0 * ad).abs() < 1e-9 * w.abs().max(1.0));
            assert_eq!(w2, 0.0);
        }
        let (w, w2) = control_amplitudes(t / 4.0, t, 4.0).unwrap();
        let (rw, rw2) = raw_amplitudes(t / 4.0, t, 4.0);
        assert!(((w - rw) / w).abs() < 1e-8);
        assert!(((w2 - rw2) / w2).abs() < 1e-8);
    }

    #[test]
    fn regularized_matches_raw_form_in_interior() {
        let t = 1.0;
        for eta in [1.0, 2.0, 4.0] {
            let mut checked = 0;
            for k in 1..1000 {
                let tk = k as f64 / 1000.0;
                if alpha_of(tk, t).unwrap().sin() <= 1e-3 {
                    continue;
                }
                let (w, w2) = control_amplitudes(tk, t, eta).unwrap();
                let (rw, rw2) = raw_amplitudes(tk, t, eta);
                let scale = w.abs().max(w2.abs()).max(1e-6);
                // the oracle differentiates numerically, so cot(alpha) amplifies its rounding
                assert!(
                    (w - rw).abs() <= 1e-6 * scale,
                    "eta {eta} t {tk}: {w} vs {rw}"
                );
                assert!(
                    (w2 - rw2).abs() <= 1e-6 * scale,
                    "eta {eta} t {tk}: {w2} vs {rw2}"
                );
                checked += 1;
            }
            assert!(checked > 950);
        }
    }

    #[test]
    fn duration_examples() {
        let t4 = solve_duration(PEAK, 4.0);
        assert!((t4 - 480e-6).abs() <= 0.05 * 480e-6, "T = {t4}");
        let t0 = solve_duration(PEAK, 0.0);
        assert!((t0 - PI * PI / PEAK).abs() < 1e-12 * t0);
        let half = solve_duration(2.0 * PEAK, 4.0);
        assert!((2.0 * half - t4).abs() < 1e-15);
    }

    #[test]
    fn duration_is_grid_converged_and_monotone() {
        for eta in [0.0, 1.0, 4.0] {
            let p1 = peak_with_grid(eta, PEAK_SCAN_POINTS);
            let p2 = peak_with_grid(eta, 2 * PEAK_SCAN_POINTS);
            assert!(((p1 - p2) / p1).abs() < 1e-4);
        }
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let t = solve_duration(PEAK * k as f64 / 4.0, 4.0);
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn per_tone_budget_is_shorter_for_x() {
        let composite = solve_duration(PEAK, 4.0);
        let per_tone = solve_duration_per_tone(PEAK, 4.0, FRAC_PI_2);
        assert!(per_tone < composite);
        let spec =
            GateSpec::new(FRAC_PI_2, 0.0, PI, 4.0, DriveBudget::PeakRabiPerTone(PEAK)).unwrap();
        let s = synthesize(&spec, 4096).unwrap();
        assert!((s.peak_amplitude() - PEAK).abs() < 1e-3 * PEAK);
    }

    #[test]
    fn split_bright_examples() {
        let (w0, w1, p1) = split_bright(2.0, FRAC_PI_2, 0.0, 0.0);
        assert!((w0 - 2f64.sqrt()).abs() < 1e-15 && (w1 - 2f64.sqrt()).abs() < 1e-15);
        assert!((p1 - PI).abs() < 1e-15);
        let (w0, w1, _) = split_bright(3.0, 0.0, 1.0, 0.5);
        assert_eq!((w0, w1), (0.0, 3.0));
    }

    proptest! {
        #[test]
        fn split_bright_preserves_composite(w in -10.0f64..10.0, theta in 0.0f64..PI) {
            let (w0, w1, _) = split_bright(w, theta, 0.3, 0.0);
            prop_assert!((w0.hypot(w1) - w.abs()).abs() < 1e-12);
        }
    }

    fn x_spec(eta: f64) -> GateSpec {
        GateSpec::new(FRAC_PI_2, 0.0, PI, eta, DriveBudget::PeakRabi(PEAK)).unwrap()
    }

    #[test]
    fn synthesized_x_schedule() {
        let s = synthesize(&x_spec(4.0), DEFAULT_SAMPLES).unwrap();
        assert!((s.duration() - 480e-6).abs() < 0.05 * 480e-6);
        let peak = s.peak_amplitude();
        for tone in 0..3 {
            for k in [0, s.segments() / 2, s.segments()] {
                assert!(
                    s.omega(tone)[k].abs() <= 1e-9 * peak,
                    "tone {tone} sample {k}"
                );
            }
        }
        let p = s.peak_composite();
        assert!(
            p <= PEAK * (1.0 + 1e-12) && p > PEAK * (1.0 - 1e-5),
            "sampled peak {p}"
        );
        let [first, second] = s.interval_phases();
        assert_eq!(first[0], 0.0);
        assert!((second[0] + PI).abs() < 1e-15);
        // phi = phi_0 - phi_1 + pi is the same on both halves.
        assert!(((first[0] - first[1]) - (second[0] - second[1])).abs() < 1e-15);
        assert_eq!(first[2], 0.0);
        assert_eq!(second[2], 0.0);
    }

    #[test]
    fn zero_gamma_keeps_phases() {
        let spec = GateSpec::new(0.7, 0.2, 0.0, 4.0, DriveBudget::Duration(1e-4)).unwrap();
        let s = synthesize(&spec, 200).unwrap();
        let [a, b] = s.interval_phases();
        assert_eq!(a, b);
    }

    #[test]
    fn eta_zero_reduces_to_pi_pulses() {
        let s = synthesize(&x_spec(0.0), DEFAULT_SAMPLES).unwrap();
        assert!(s.omega(2).iter().all(|&w| w == 0.0));
        // Composite area over each half by Simpson's rule.
        let n = s.segments() / 2;
        let h = s.dt();
        let composite: Vec<f64> = (0..=s.segments())
            .map(|k| s.omega(0)[k].hypot(s.omega(1)[k]))
            .collect();
        for half in [0..=n, n..=2 * n] {
            let idx: Vec<usize> = half.collect();
            let mut area = 0.0;
            for (i, &k) in idx.iter().enumerate() {
                let wgt = if i == 0 || i == idx.len() - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                area += wgt * composite[k];
            }
            area *= h / 3.0;
            assert!((area - PI).abs() < 1e-6, "area {area}");
        }
    }

    #[test]
    fn boundary_conditions_of_loop() {
        for eta in [0.0, 1.0, 4.0] {
            let l = LoopSchedule::new(3e-4, eta, 1.0);
            for t in [0.0, 3e-4] {
                assert!(l.alpha(t).unwrap().abs() < 1e-12);
                assert!(l.beta(t).unwrap().abs() < 1e-12);
            }
            assert!((l.alpha(1.5e-4).unwrap() - FRAC_PI_2).abs() < 1e-12);
            assert_eq!(l.phase_at(1.0e-4), 0.0);
            assert_eq!(l.phase_at(2.0e-4), -1.0);
        }
    }

    #[test]
    fn rabi_error_examples() {
        let s = synthesize(&x_spec(4.0), 256).unwrap();
        assert_eq!(inject_rabi_error(&s, 0.0), s);
        let up = inject_rabi_error(&s, 0.1);
        let down2 = inject_rabi_error(&inject_rabi_error(&s, -0.1), -0.1);
        for tone in 0..3 {
            for k in 0..=s.segments() {
                let w = s.omega(tone)[k];
                assert!((up.omega(tone)[k] - 1.1 * w).abs() <= 1e-15 * w.abs().max(1.0));
                assert!((down2.omega(tone)[k] - 0.81 * w).abs() <= 1e-12 * w.abs().max(1.0));
            }
        }
        assert_eq!(up.duration(), s.duration());
        assert_eq!(up.interval_phases(), s.interval_phases());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(GateSpec::new(0.0, 0.0, 0.0, -1.0, DriveBudget::Duration(1.0)).is_err());
        assert!(GateSpec::new(0.0, 0.0, 0.0, f64::NAN, DriveBudget::Duration(1.0)).is_err());
        assert!(GateSpec::new(0.0, 0.0, 0.0, 1.0, DriveBudget::PeakRabi(0.0)).is_err());
        let spec = x_spec(4.0);
        assert!(synthesize(&spec, 99).is_err());
        assert!(synthesize(&spec, 101).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = synthesize(&x_spec(4.0), 100).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "t_s,omega0_rad_s,omega1_rad_s,omega2_rad_s,phi0_rad,phi1_rad,phi2_rad"
        );
        assert_eq!(lines.len(), 102);
        assert!(lines[1].starts_with("0.00000000000e0,"));
        let last: Vec<f64> = lines[101].split(',').map(|v| v.parse().unwrap()).collect();
        assert!((last[0] - s.duration()).abs() < 1e-11 * s.duration());
        assert!((last[4] + PI).abs() < 1e-10);
    }
}
