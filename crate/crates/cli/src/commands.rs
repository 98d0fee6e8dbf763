use std::fmt::Write as _;

use anyhow::Result;
use hqctd::characterization::{
    qpt, rb_run, robustness_sweep, sample_population_trace, sweep_csv, RbConfig, RbCurve, Readout,
    ShotConfig, SweepConfig,
};
use hqctd::dynamics::{population_trace, HamiltonianModel};
use hqctd::gates::{gate_fidelity, realize, realize_channel, GateName};
use hqctd::pulse::{fmt_sig, synthesize, GateSpec};
use hqctd::quantum::{QubitChannel, StateVector, C64};
use hqctd::twoqubit::controlled_phase_gate;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Files to write plus a human-readable report and any `--check` failures.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub report: String,
    pub failures: Vec<String>,
}

impl Outcome {
    fn file(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

/// Per-experiment seed: distinct, reproducible offsets of the master seed.
fn derived_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn grid(cfg: &ExperimentConfig, gates: &[String]) -> Result<Vec<(GateName, f64)>> {
    let mut out = Vec::new();
    for g in cfg.gate_names(gates)? {
        for &eta in &cfg.etas {
            out.push((g, eta));
        }
    }
    Ok(out)
}

fn stem(gate: GateName, eta: f64) -> String {
    format!("{gate}_eta{eta}")
}

pub fn gates(cfg: &ExperimentConfig) -> Result<Outcome> {
    let budget = cfg.drive_budget()?;
    let opts = cfg.realize_options();
    let rows = grid(cfg, &cfg.gates)?
        .into_par_iter()
        .map(|(g, eta)| {
            let r = realize(&g.spec(eta, budget)?, &opts)?;
            Ok((
                g,
                eta,
                r.duration,
                gate_fidelity(&r, &g.target())?,
                r.leakage,
            ))
        })
        .collect::<hqctd::Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let mut csv = String::from("gate,eta,T_s,fidelity,leakage\n");
    for &(g, eta, t, f, leak) in &rows {
        let _ = writeln!(
            csv,
            "{g},{eta},{},{},{}",
            fmt_sig(t),
            fmt_sig(f),
            fmt_sig(leak)
        );
        let _ = writeln!(
            out.report,
            "{g} eta={eta}: T = {:.2} us, F = {:.9}, leakage = {:.2e}",
            t * 1e6,
            f,
            leak
        );
        if f < cfg.check_threshold {
            out.fail(format!(
                "{g} eta={eta}: fidelity {f} below {}",
                cfg.check_threshold
            ));
        }
    }
    out.file("gates.csv", csv);
    Ok(out)
}

pub fn populations(cfg: &ExperimentConfig) -> Result<Outcome> {
    let budget = cfg.drive_budget()?;
    let noise = cfg.noise_if(cfg.populations.noisy)?;
    let points = grid(cfg, &cfg.populations.gates)?;
    let traces = points
        .par_iter()
        .map(|&(g, eta)| {
            let schedule = synthesize(&g.spec(eta, budget)?, cfg.samples)?;
            population_trace(
                &StateVector::level(0),
                &HamiltonianModel::new(schedule),
                noise.as_ref(),
                cfg.tol,
            )
        })
        .collect::<hqctd::Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    for (k, (&(g, eta), trace)) in points.iter().zip(&traces).enumerate() {
        let name = stem(g, eta);
        out.file(
            format!("populations_{name}.csv"),
            trace.to_csv(cfg.populations.stride),
        );
        if cfg.populations.shots > 0 {
            let shots = ShotConfig::new(cfg.populations.shots, derived_seed(cfg.seed, k))?;
            let sampled = sample_population_trace(trace, &shots, 0);
            out.file(
                format!("populations_{name}_sampled.csv"),
                sampled.to_csv(cfg.populations.stride),
            );
        }
        let p = trace.final_populations();
        let _ = writeln!(
            out.report,
            "{g} eta={eta}: final p0={:.6} p1={:.6} p2={:.2e} pa={:.2e}",
            p[0], p[1], p[2], p[3]
        );
        if g == GateName::X && noise.is_none() && p[1] < 0.999 {
            out.fail(format!("{g} eta={eta}: final p1 {} below 0.999", p[1]));
        }
    }
    Ok(out)
}

pub fn qpt_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let budget = cfg.drive_budget()?;
    let noise = cfg.noise_if(cfg.qpt.noisy)?;
    let points = grid(cfg, &cfg.gates)?;
    let results = points
        .par_iter()
        .enumerate()
        .map(|(k, &(g, eta))| {
            let schedule = synthesize(&g.spec(eta, budget)?, cfg.samples)?;
            let channel = realize_channel(&schedule, noise.as_ref(), cfg.tol)?;
            let readout = match cfg.qpt.shots {
                0 => Readout::Exact,
                n => Readout::Shots(ShotConfig::new(n, derived_seed(cfg.seed, k))?),
            };
            qpt(&channel, &g.target(), &readout)
        })
        .collect::<hqctd::Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let mut summary = String::from("gate,eta,fidelity\n");
    for (&(g, eta), res) in points.iter().zip(&results) {
        out.file(format!("qpt_{}.csv", stem(g, eta)), res.process.to_csv());
        let _ = writeln!(summary, "{g},{eta},{}", fmt_sig(res.fidelity));
        let _ = writeln!(out.report, "{g} eta={eta}: F_QPT = {:.6}", res.fidelity);
        if res.fidelity < 0.99 {
            out.fail(format!(
                "{g} eta={eta}: QPT fidelity {} below 0.99",
                res.fidelity
            ));
        }
    }
    out.file("qpt_summary.csv", summary);
    Ok(out)
}

#[derive(Serialize)]
struct FitSummary {
    a: f64,
    r: f64,
    b: f64,
    residual: f64,
}

impl From<&RbCurve> for FitSummary {
    fn from(c: &RbCurve) -> Self {
        Self {
            a: c.fit.a,
            r: c.fit.r,
            b: c.fit.b,
            residual: c.fit.residual,
        }
    }
}

#[derive(Serialize)]
struct RbSummary {
    eta: f64,
    interleaved: Option<String>,
    reference: FitSummary,
    interleaved_fit: Option<FitSummary>,
    f_ave: f64,
    f_gate: Option<f64>,
}

pub fn rb(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = &cfg.rb;
    let noise = cfg.noise_if(s.noisy)?;
    let mut rc = RbConfig::new(s.lengths.clone(), s.eta, cfg.drive_budget()?);
    rc.sequences = s.sequences;
    rc.seed = cfg.seed;
    rc.interleaved = if s.interleaved.is_empty() {
        None
    } else {
        Some(s.interleaved.parse()?)
    };
    if s.shots > 0 {
        rc.readout = Readout::Shots(ShotConfig::new(s.shots, cfg.seed)?);
    }
    let depol = QubitChannel::depolarizing(s.depolarizing);
    let report = rb_run(&rc, |spec: &GateSpec| {
        let schedule = synthesize(spec, cfg.samples)?;
        Ok(realize_channel(&schedule, noise.as_ref(), cfg.tol)?.then(&depol))
    })?;
    let mut out = Outcome::default();
    out.file("rb_reference.csv", report.reference.to_csv());
    if let Some(c) = &report.interleaved {
        out.file("rb_interleaved.csv", c.to_csv());
    }
    let summary = RbSummary {
        eta: s.eta,
        interleaved: rc.interleaved.map(|g| g.to_string()),
        reference: (&report.reference).into(),
        interleaved_fit: report.interleaved.as_ref().map(Into::into),
        f_ave: report.f_ave,
        f_gate: report.f_gate,
    };
    out.file(
        "rb_summary.json",
        serde_json::to_string_pretty(&summary)? + "\n",
    );
    let _ = writeln!(
        out.report,
        "r_ref = {:.6}, F_ave = {:.6}",
        report.reference.fit.r, report.f_ave
    );
    if let (Some(g), Some(c)) = (report.f_gate, &report.interleaved) {
        let _ = writeln!(out.report, "r_int = {:.6}, F_gate = {:.6}", c.fit.r, g);
    }
    if noise.is_none() && s.depolarizing == 0.0 && report.f_ave < 0.9999 {
        out.fail(format!("noiseless F_ave {} below 0.9999", report.f_ave));
    }
    Ok(out)
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let noise = cfg.noise_if(cfg.sweep.noisy)?;
    let sc = SweepConfig {
        gates: cfg.gate_names(&cfg.gates)?,
        etas: cfg.etas.clone(),
        epsilons: cfg.sweep.epsilons.clone(),
        budget: cfg.drive_budget()?,
        noise: noise.clone(),
        options: cfg.realize_options(),
    };
    let rows = robustness_sweep(&sc)?;
    let mut out = Outcome::default();
    out.file("sweep.csv", sweep_csv(&rows));
    let find = |g: GateName, eta: f64, e: f64| {
        rows.iter()
            .find(|r| r.gate == g && r.eta == eta && r.epsilon == e)
            .map(|r| r.fidelity)
    };
    for &g in &sc.gates {
        let mut worst_margin = f64::INFINITY;
        for &e in &sc.epsilons {
            if e == 0.0 {
                continue;
            }
            if let (Some(f0), Some(f4)) = (find(g, 0.0, e), find(g, 4.0, e)) {
                worst_margin = worst_margin.min(f4 - f0);
                if noise.is_none() && f4 < f0 {
                    out.fail(format!("{g} eps={e}: F(eta=4) {f4} < F(eta=0) {f0}"));
                }
            }
        }
        if worst_margin.is_finite() {
            let _ = writeln!(
                out.report,
                "{g}: min over eps != 0 of F(eta=4) - F(eta=0) = {worst_margin:.3e}"
            );
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CzSummary {
    gamma: f64,
    eta: f64,
    duration_s: f64,
    leakage: f64,
    max_deviation: f64,
}

pub fn cz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let gate = controlled_phase_gate(
        cfg.cz.gamma,
        cfg.cz.eta,
        cfg.drive_budget()?,
        &cfg.realize_options(),
    )?;
    let phase = C64::from_polar(1.0, cfg.cz.gamma);
    let max_deviation = (0..4)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .map(|(r, c)| {
            let ideal = match (r == c, r) {
                (true, 3) => phase,
                (true, _) => C64::new(1.0, 0.0),
                _ => C64::new(0.0, 0.0),
            };
            (gate.block[(r, c)] - ideal).norm()
        })
        .fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.file("cz.csv", gate.to_csv());
    let summary = CzSummary {
        gamma: cfg.cz.gamma,
        eta: cfg.cz.eta,
        duration_s: gate.duration,
        leakage: gate.leakage,
        max_deviation,
    };
    out.file(
        "cz_summary.json",
        serde_json::to_string_pretty(&summary)? + "\n",
    );
    let _ = writeln!(
        out.report,
        "gamma = {:.6}: T = {:.2} us, leakage = {:.2e}, max |U - diag(1,1,1,e^(i gamma))| = {:.2e}",
        cfg.cz.gamma,
        gate.duration * 1e6,
        gate.leakage,
        max_deviation
    );
    if max_deviation > 1e-4 || gate.leakage > 1e-6 {
        out.fail(format!(
            "controlled phase deviates by {max_deviation:e} with leakage {:e}",
            gate.leakage
        ));
    }
    Ok(out)
}

pub fn schedule(cfg: &ExperimentConfig) -> Result<Outcome> {
    let budget = cfg.drive_budget()?;
    let mut out = Outcome::default();
    for (g, eta) in grid(cfg, &cfg.gates)? {
        let s = synthesize(&g.spec(eta, budget)?, cfg.samples)?;
        let _ = writeln!(
            out.report,
            "{g} eta={eta}: T = {:.2} us, peak = {:.1} rad/s",
            s.duration() * 1e6,
            s.peak_amplitude()
        );
        out.file(format!("schedule_{}.csv", stem(g, eta)), s.to_csv());
    }
    Ok(out)
}
