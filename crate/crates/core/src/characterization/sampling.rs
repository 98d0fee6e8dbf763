use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::PopulationTrace;
use crate::error::{Error, Result};
use crate::quantum::{paulis, CMatrix, DensityMatrix};

pub const DEFAULT_SHOTS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidConfig("shots must be >= 1".into()));
        }
        Ok(Self { shots, seed })
    }

    /// Generator for work unit `unit`: the master seed keys the ChaCha
    /// stream and the unit index selects the stream, so units can run in any
    /// order.
    pub fn unit_rng(&self, unit: u64) -> ChaCha8Rng {
        unit_rng(self.seed, unit)
    }
}

impl Default for ShotConfig {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }
}

pub fn unit_rng(seed: u64, unit: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit);
    rng
}

/// How measurement outcomes are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Outcome frequencies equal the Born probabilities (infinite shots).
    Exact,
    Shots(ShotConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn pauli(self) -> CMatrix {
        let [_, x, y, z] = paulis();
        match self {
            Axis::X => x,
            Axis::Y => y,
            Axis::Z => z,
        }
    }

    /// Projector onto the `+1` (`outcome = 0`) or `-1` (`outcome = 1`) eigenspace.
    pub fn projector(self, outcome: usize) -> CMatrix {
        let s = if outcome == 0 { 0.5 } else { -0.5 };
        (CMatrix::identity(2, 2) * crate::quantum::c(0.5, 0.0))
            + self.pauli() * crate::quantum::c(s, 0.0)
    }
}

/// Outcome weights `[+1, -1]` for one measurement axis; either raw counts or
/// exact probabilities.
pub type AxisCounts = [f64; 2];

/// Probability of the `+1` outcome, with any trace lost to leakage
/// renormalized away.
pub fn plus_probability(rho: &CMatrix, axis: Axis) -> f64 {
    let tr = rho.trace().re;
    if tr <= 0.0 {
        return 0.5;
    }
    ((axis.projector(0) * rho).trace().re / tr).clamp(0.0, 1.0)
}

/// Projective measurement of `rho` along `axis` repeated `cfg.shots` times.
pub fn sample_measurement(rho: &DensityMatrix, axis: Axis, cfg: &ShotConfig) -> [u64; 2] {
    let mut rng = cfg.unit_rng(0);
    sample_with(rho.matrix(), axis, cfg.shots, &mut rng)
}

pub(crate) fn sample_with(rho: &CMatrix, axis: Axis, shots: u64, rng: &mut ChaCha8Rng) -> [u64; 2] {
    let p = plus_probability(rho, axis);
    let plus = Binomial::new(shots, p)
        .expect("probability in [0, 1]")
        .sample(rng);
    [plus, shots - plus]
}

/// Multinomial draw of `shots` outcomes over `probs` (renormalized), by
/// sequential conditional binomials.
pub fn sample_counts(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut left = shots;
    let mut mass = total;
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        let n = if k + 1 == probs.len() {
            left
        } else if left == 0 || mass <= 0.0 {
            0
        } else {
            Binomial::new(left, (p / mass).clamp(0.0, 1.0))
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        out.push(n);
        left -= n;
        mass -= p;
    }
    out
}

/// Population trace as it would be estimated from `cfg.shots` repetitions
/// at every sample; sample `k` uses stream `stream + k`.
pub fn sample_population_trace(
    trace: &PopulationTrace,
    cfg: &ShotConfig,
    stream: u64,
) -> PopulationTrace {
    let populations = trace
        .populations
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let counts = sample_counts(p, cfg.shots, &mut cfg.unit_rng(stream + k as u64));
            std::array::from_fn(|j| counts[j] as f64 / cfg.shots as f64)
        })
        .collect();
    PopulationTrace {
        times: trace.times.clone(),
        populations,
    }
}

/// Outcome weights for `rho` under the given readout; `unit` selects the
/// random stream in shot mode.
pub(crate) fn measure(rho: &CMatrix, axis: Axis, readout: &Readout, unit: u64) -> AxisCounts {
    match readout {
        Readout::Exact => {
            let p = plus_probability(rho, axis);
            [p, 1.0 - p]
        }
        Readout::Shots(cfg) => {
            let [a, b] = sample_with(rho, axis, cfg.shots, &mut cfg.unit_rng(unit));
            [a as f64, b as f64]
        }
    }
}
