use rand::Rng;
use rayon::prelude::*;

use super::clifford::{clifford_group, same_up_to_phase};
use super::fit::{fit_decay, FitResult};
use super::sampling::{unit_rng, Readout};
use crate::error::{Error, Result};
use crate::gates::{rotation_angles, target_unitary, GateName};
use crate::pulse::{DriveBudget, GateSpec};
use crate::quantum::{c, CMatrix, QubitChannel};

pub const DEFAULT_SEQUENCES: usize = 20;
/// Stream offset separating interleaved from reference sequences.
const INTERLEAVED_STREAM: u64 = 1 << 32;
/// Stream offset separating readout sampling from sequence drawing.
const READOUT_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct RbConfig {
    pub lengths: Vec<usize>,
    pub sequences: usize,
    pub interleaved: Option<GateName>,
    pub seed: u64,
    pub readout: Readout,
    /// Dark-path weight and drive budget used for every loop in a sequence.
    pub eta: f64,
    pub budget: DriveBudget,
}

impl RbConfig {
    pub fn new(lengths: Vec<usize>, eta: f64, budget: DriveBudget) -> Self {
        Self {
            lengths,
            sequences: DEFAULT_SEQUENCES,
            interleaved: None,
            seed: 0,
            readout: Readout::Exact,
            eta,
            budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths[0] == 0 {
            return Err(Error::InvalidConfig(
                "sequence lengths must be positive".into(),
            ));
        }
        if self.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "sequence lengths must be strictly increasing".into(),
            ));
        }
        if self.sequences == 0 {
            return Err(Error::InvalidConfig(
                "need at least one sequence per length".into(),
            ));
        }
        Ok(())
    }

    fn spec(&self, theta: f64, phi: f64, gamma: f64) -> Result<GateSpec> {
        GateSpec::new(theta, phi, gamma, self.eta, self.budget)
    }
}

/// One step of a benchmarking sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Clifford(usize),
    Target,
    /// Loop undoing everything before it; `Clifford` when the inverse lies
    /// in the group, otherwise an explicit rotation.
    Recovery {
        theta: f64,
        phi: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub steps: Vec<Step>,
}

impl Sequence {
    /// Product of the ideal unitaries, last step leftmost.
    pub fn ideal_product(&self, target: Option<GateName>) -> CMatrix {
        let g = clifford_group();
        self.steps.iter().fold(CMatrix::identity(2, 2), |acc, s| {
            let u = match s {
                Step::Clifford(k) => g.elements[*k].unitary.clone(),
                Step::Target => target
                    .expect("interleaved step without a target")
                    .target()
                    .into_matrix(),
                Step::Recovery { theta, phi, gamma } => {
                    target_unitary(*theta, *phi, *gamma).into_matrix()
                }
            };
            u * acc
        })
    }
}

/// Draws sequence `index` of length `m`: `m` uniform Cliffords, each
/// followed by the target when `target` is set, then the recovery loop.
pub fn generate_sequence(seed: u64, unit: u64, m: usize, target: Option<GateName>) -> Sequence {
    let g = clifford_group();
    let mut rng = unit_rng(seed, unit);
    let mut steps = Vec::with_capacity(2 * m + 1);
    let mut acc = CMatrix::identity(2, 2);
    let t = target.map(|t| t.target().into_matrix());
    for _ in 0..m {
        let k = rng.random_range(0..g.len());
        steps.push(Step::Clifford(k));
        acc = &g.elements[k].unitary * acc;
        if let Some(t) = &t {
            steps.push(Step::Target);
            acc = t * acc;
        }
    }
    let inverse = acc.adjoint();
    let (theta, phi, gamma) = match g.find(&inverse) {
        Some(k) => {
            let e = &g.elements[k];
            (e.theta, e.phi, e.gamma)
        }
        None => rotation_angles(&inverse),
    };
    steps.push(Step::Recovery { theta, phi, gamma });
    Sequence { steps }
}

/// Mean survival per length plus the decay fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RbCurve {
    pub lengths: Vec<usize>,
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    pub n_sequences: usize,
    pub fit: FitResult,
}

impl RbCurve {
    /// Columns `m, mean_survival, stddev, n_sequences`.
    pub fn to_csv(&self) -> String {
        use crate::pulse::fmt_sig;
        let mut out = String::from("m,mean_survival,stddev,n_sequences\n");
        for k in 0..self.lengths.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.lengths[k],
                fmt_sig(self.mean[k]),
                fmt_sig(self.stddev[k]),
                self.n_sequences
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbReport {
    pub reference: RbCurve,
    pub interleaved: Option<RbCurve>,
    /// `(F_ave, F_gate)`; `F_gate` only when interleaved.
    pub f_ave: f64,
    pub f_gate: Option<f64>,
}

/// `F_ave = 1 - (1 - r_ref)/2` and `F_gate = 1 - (1 - r_int/r_ref)/2`.
pub fn rb_fidelities(r_ref: f64, r_int: f64) -> Result<(f64, f64)> {
    for (name, r) in [("r_ref", r_ref), ("r_int", r_int)] {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "{name} must lie in (0, 1], got {r}"
            )));
        }
    }
    Ok((1.0 - (1.0 - r_ref) / 2.0, 1.0 - (1.0 - r_int / r_ref) / 2.0))
}

/// Reference and optionally interleaved randomized benchmarking.
/// `gate_impl` turns a loop specification into the channel it implements.
pub fn rb_run<F>(cfg: &RbConfig, gate_impl: F) -> Result<RbReport>
where
    F: Fn(&GateSpec) -> Result<QubitChannel> + Sync,
{
    cfg.validate()?;
    let g = clifford_group();
    let cliffords: Vec<QubitChannel> = g
        .elements
        .par_iter()
        .map(|e| gate_impl(&cfg.spec(e.theta, e.phi, e.gamma)?))
        .collect::<Result<_>>()?;
    let target = match cfg.interleaved {
        Some(name) => {
            let (t, p, gm) = name.angles();
            Some(gate_impl(&cfg.spec(t, p, gm)?)?)
        }
        None => None,
    };
    let reference = curve(cfg, None, &cliffords, None, &gate_impl)?;
    let interleaved = match (&cfg.interleaved, &target) {
        (Some(name), Some(ch)) => Some(curve(cfg, Some(*name), &cliffords, Some(ch), &gate_impl)?),
        _ => None,
    };
    let f_ave = 1.0 - (1.0 - reference.fit.r) / 2.0;
    let f_gate = match &interleaved {
        Some(c) => Some(
            rb_fidelities(
                reference.fit.r.max(f64::MIN_POSITIVE),
                c.fit.r.max(f64::MIN_POSITIVE),
            )?
            .1,
        ),
        None => None,
    };
    Ok(RbReport {
        reference,
        interleaved,
        f_ave,
        f_gate,
    })
}

fn curve<F>(
    cfg: &RbConfig,
    target: Option<GateName>,
    cliffords: &[QubitChannel],
    target_channel: Option<&QubitChannel>,
    gate_impl: &F,
) -> Result<RbCurve>
where
    F: Fn(&GateSpec) -> Result<QubitChannel> + Sync,
{
    let g = clifford_group();
    let offset = if target.is_some() {
        INTERLEAVED_STREAM
    } else {
        0
    };
    let units: Vec<(usize, usize)> = (0..cfg.lengths.len())
        .flat_map(|l| (0..cfg.sequences).map(move |s| (l, s)))
        .collect();
    let survival: Vec<f64> = units
        .par_iter()
        .map(|&(l, s)| {
            let unit = offset + (l * cfg.sequences + s) as u64;
            let seq = generate_sequence(cfg.seed, unit, cfg.lengths[l], target);
            let mut rho = CMatrix::zeros(2, 2);
            rho[(0, 0)] = c(1.0, 0.0);
            for step in &seq.steps {
                rho = match step {
                    Step::Clifford(k) => cliffords[*k].apply(&rho),
                    Step::Target => target_channel.expect("target channel").apply(&rho),
                    Step::Recovery { theta, phi, gamma } => {
                        let u = target_unitary(*theta, *phi, *gamma).into_matrix();
                        match g
                            .elements
                            .iter()
                            .position(|e| same_up_to_phase(&e.unitary, &u))
                        {
                            Some(k) => cliffords[k].apply(&rho),
                            None => gate_impl(&cfg.spec(*theta, *phi, *gamma)?)?.apply(&rho),
                        }
                    }
                };
            }
            let p = rho[(0, 0)].re.clamp(0.0, 1.0);
            Ok(match cfg.readout {
                Readout::Exact => p,
                Readout::Shots(sc) => {
                    use rand_distr::{Binomial, Distribution};
                    let mut rng = unit_rng(sc.seed, READOUT_STREAM + unit);
                    Binomial::new(sc.shots, p)
                        .expect("p in [0, 1]")
                        .sample(&mut rng) as f64
                        / sc.shots as f64
                }
            })
        })
        .collect::<Result<_>>()?;
    let n = cfg.sequences as f64;
    let mut mean = Vec::new();
    let mut stddev = Vec::new();
    for chunk in survival.chunks(cfg.sequences) {
        let mu = chunk.iter().sum::<f64>() / n;
        let var = if cfg.sequences > 1 {
            chunk.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean.push(mu);
        stddev.push(var.sqrt());
    }
    let fit = fit_decay(&cfg.lengths, &mean, &stddev)?;
    Ok(RbCurve {
        lengths: cfg.lengths.clone(),
        mean,
        stddev,
        n_sequences: cfg.sequences,
        fit,
    })
}

/// Exact unitary channel of the loop's target rotation.
pub fn ideal_impl(spec: &GateSpec) -> Result<QubitChannel> {
    QubitChannel::from_unitary(&target_unitary(spec.theta, spec.phi, spec.gamma))
}
