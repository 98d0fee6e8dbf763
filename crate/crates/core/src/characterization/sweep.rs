use rayon::prelude::*;

use crate::dynamics::NoiseModel;
use crate::error::Result;
use crate::gates::{realize_channel, GateName, RealizeOptions};
use crate::pulse::{fmt_sig, inject_rabi_error, synthesize, DriveBudget};

/// `{+-0.02, +-0.04, ..., +-0.10}` with 0 in the middle.
pub fn default_epsilons() -> Vec<f64> {
    (-5..=5).map(|k| k as f64 * 0.02).collect()
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub gates: Vec<GateName>,
    pub etas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub budget: DriveBudget,
    pub noise: Option<NoiseModel>,
    pub options: RealizeOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gate: GateName,
    pub eta: f64,
    pub epsilon: f64,
    pub fidelity: f64,
}

/// Average gate fidelity, leakage included, of every `(gate, eta, epsilon)`
/// with the Rabi frequencies scaled by `1 + epsilon`. Rows come back in
/// gate, eta, epsilon order whatever the thread count.
pub fn robustness_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut points = Vec::new();
    for &gate in &cfg.gates {
        for &eta in &cfg.etas {
            for &epsilon in &cfg.epsilons {
                points.push((gate, eta, epsilon));
            }
        }
    }
    points
        .par_iter()
        .map(|&(gate, eta, epsilon)| {
            let schedule = synthesize(&gate.spec(eta, cfg.budget)?, cfg.options.n_samples)?;
            let channel = realize_channel(
                &inject_rabi_error(&schedule, epsilon),
                cfg.noise.as_ref(),
                cfg.options.tol,
            )?;
            Ok(SweepRow {
                gate,
                eta,
                epsilon,
                fidelity: channel.average_fidelity(&gate.target())?,
            })
        })
        .collect()
}

/// Columns `gate, eta, epsilon, fidelity`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("gate,eta,epsilon,fidelity\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.gate,
            r.eta,
            r.epsilon,
            fmt_sig(r.fidelity)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn epsilon_grid() {
        let e = default_epsilons();
        assert_eq!(e.len(), 11);
        assert_eq!(e[5], 0.0);
        assert!((e[0] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn small_sweep_ordering_and_peak() {
        let cfg = SweepConfig {
            gates: vec![GateName::X],
            etas: vec![0.0, 4.0],
            epsilons: vec![-0.06, 0.0, 0.06],
            budget: DriveBudget::PeakRabi(2.0 * PI * 1e4),
            noise: None,
            options: RealizeOptions::default(),
        };
        let rows = robustness_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].eta, 0.0);
        assert_eq!(rows[1].epsilon, 0.0);
        for chunk in rows.chunks(3) {
            assert!(chunk[1].fidelity >= 1.0 - 1e-6);
            assert!(
                chunk[0].fidelity <= chunk[1].fidelity && chunk[2].fidelity <= chunk[1].fidelity
            );
        }
        assert!(sweep_csv(&rows).starts_with("gate,eta,epsilon,fidelity\nX,0,-0.06,"));
    }
}
