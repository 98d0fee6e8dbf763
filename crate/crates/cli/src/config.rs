//! Experiment configuration, read from TOML. Every key is optional; the
//! resolved copy written next to the results lists all of them.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hqctd::dynamics::NoiseModel;
use hqctd::gates::{GateName, RealizeOptions};
use hqctd::pulse::DriveBudget;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Gates realized by `gates`, `qpt` and `sweep`.
    pub gates: Vec<String>,
    pub etas: Vec<f64>,
    /// Peak composite Rabi frequency, rad/s.
    pub peak_rabi: f64,
    /// `composite` or `per_tone`.
    pub budget: String,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Fidelity floor for `--check`.
    pub check_threshold: f64,
    pub noise: NoiseConfig,
    pub populations: PopulationsConfig,
    pub qpt: QptConfig,
    pub rb: RbSection,
    pub sweep: SweepSection,
    pub cz: CzConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Dephasing time in seconds; 0 turns dephasing off.
    pub t2: f64,
    /// Uniform depolarizing rate, 1/s.
    pub depolarizing_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationsConfig {
    pub gates: Vec<String>,
    /// Repetitions per sample for the sampled traces; 0 skips them.
    pub shots: u64,
    /// Keep every `stride`-th schedule sample in the files.
    pub stride: usize,
    pub noisy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QptConfig {
    /// Shots per measurement setting; 0 uses exact probabilities.
    pub shots: u64,
    pub noisy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbSection {
    pub lengths: Vec<usize>,
    pub sequences: usize,
    /// Gate interleaved after every Clifford; empty for reference only.
    pub interleaved: String,
    pub eta: f64,
    /// Depolarizing probability appended to every loop.
    pub depolarizing: f64,
    /// Shots per sequence; 0 uses the exact survival probability.
    pub shots: u64,
    pub noisy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    pub noisy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CzConfig {
    pub gamma: f64,
    pub eta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gates: GateName::ALL.iter().map(|g| g.to_string()).collect(),
            etas: vec![0.0, 4.0],
            peak_rabi: 2.0 * PI * 1e4,
            budget: "composite".into(),
            samples: 4096,
            tol: 1e-9,
            seed: 0,
            out: PathBuf::from("out"),
            check_threshold: 0.999999,
            noise: NoiseConfig::default(),
            populations: PopulationsConfig::default(),
            qpt: QptConfig::default(),
            rb: RbSection::default(),
            sweep: SweepSection::default(),
            cz: CzConfig::default(),
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            t2: 1e-2,
            depolarizing_rate: 0.0,
        }
    }
}

impl Default for PopulationsConfig {
    fn default() -> Self {
        Self {
            gates: vec!["X".into(), "H".into()],
            shots: 2000,
            stride: 128,
            noisy: false,
        }
    }
}

impl Default for QptConfig {
    fn default() -> Self {
        Self {
            shots: 2000,
            noisy: false,
        }
    }
}

impl Default for RbSection {
    fn default() -> Self {
        Self {
            lengths: vec![1, 2, 4, 8, 16, 32],
            sequences: 20,
            interleaved: "X".into(),
            eta: 4.0,
            depolarizing: 0.0,
            shots: 0,
            noisy: false,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            epsilons: hqctd::characterization::default_epsilons(),
            noisy: false,
        }
    }
}

impl Default for CzConfig {
    fn default() -> Self {
        Self {
            gamma: PI,
            eta: 4.0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.gate_names(&self.gates)?;
        self.gate_names(&self.populations.gates)?;
        if !self.rb.interleaved.is_empty() {
            self.rb.interleaved.parse::<GateName>()?;
        }
        if self.etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            bail!("etas must be finite and non-negative");
        }
        if !(self.peak_rabi.is_finite() && self.peak_rabi > 0.0) {
            bail!("peak_rabi must be positive");
        }
        self.drive_budget()?;
        if self.samples < 100 || !self.samples.is_multiple_of(2) {
            bail!("samples must be even and at least 100");
        }
        if !(self.tol > 0.0) {
            bail!("tol must be positive");
        }
        if self.noise.t2 < 0.0 || self.noise.depolarizing_rate < 0.0 {
            bail!("noise parameters must be non-negative");
        }
        if self.populations.stride == 0 {
            bail!("populations.stride must be positive");
        }
        if !(0.0..=1.0).contains(&self.rb.depolarizing) {
            bail!("rb.depolarizing must lie in [0, 1]");
        }
        if self.rb.lengths.len() < 3 {
            bail!("rb.lengths needs at least three lengths for the decay fit");
        }
        if self
            .sweep
            .epsilons
            .iter()
            .any(|e| !e.is_finite() || *e <= -1.0)
        {
            bail!("sweep epsilons must be finite and > -1");
        }
        Ok(())
    }

    pub fn gate_names(&self, names: &[String]) -> Result<Vec<GateName>> {
        names
            .iter()
            .map(|n| n.parse::<GateName>().map_err(Into::into))
            .collect()
    }

    pub fn drive_budget(&self) -> Result<DriveBudget> {
        match self.budget.as_str() {
            "composite" => Ok(DriveBudget::PeakRabi(self.peak_rabi)),
            "per_tone" => Ok(DriveBudget::PeakRabiPerTone(self.peak_rabi)),
            other => bail!("budget must be \"composite\" or \"per_tone\", got {other:?}"),
        }
    }

    pub fn realize_options(&self) -> RealizeOptions {
        RealizeOptions {
            n_samples: self.samples,
            tol: self.tol,
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let t2 = (self.noise.t2 > 0.0).then_some(self.noise.t2);
        Ok(NoiseModel::dephasing(t2, self.noise.depolarizing_rate)?)
    }

    pub fn noise_if(&self, on: bool) -> Result<Option<NoiseModel>> {
        if on {
            Ok(Some(self.noise_model()?))
        } else {
            Ok(None)
        }
    }
}
