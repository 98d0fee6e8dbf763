//! `hqctd`: runs the holonomic-gate experiments from a TOML config and
//! writes plot-ready CSV/JSON files, the resolved config and a manifest.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "hqctd",
    version,
    about = "Holonomic gates on two dark paths: simulate, benchmark, sweep"
)]
struct Cli {
    /// TOML experiment config; defaults apply to anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit non-zero when a result misses its threshold.
    #[arg(long, global = true)]
    check: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Clone, Copy)]
enum Command {
    /// Realize the configured gates for every eta and score them.
    Gates,
    /// Level populations along the X and H loops, noiseless and sampled.
    Populations,
    /// Process tomography of each realized gate.
    Qpt,
    /// Reference and interleaved randomized benchmarking.
    Rb,
    /// Rabi-error robustness sweep.
    Sweep,
    /// Spin-phonon controlled-phase gate.
    Cz,
    /// Write the synthesized control schedules.
    Schedule,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gates => "gates",
            Command::Populations => "populations",
            Command::Qpt => "qpt",
            Command::Rb => "rb",
            Command::Sweep => "sweep",
            Command::Cz => "cz",
            Command::Schedule => "schedule",
        }
    }
}

#[derive(Serialize)]
struct ManifestFile {
    path: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'static str,
    files: Vec<ManifestFile>,
}

const RESOLVED_CONFIG: &str = "config.resolved.toml";

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    let outcome = match cli.command {
        Command::Gates => commands::gates(&cfg)?,
        Command::Populations => commands::populations(&cfg)?,
        Command::Qpt => commands::qpt_cmd(&cfg)?,
        Command::Rb => commands::rb(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Cz => commands::cz(&cfg)?,
        Command::Schedule => commands::schedule(&cfg)?,
    };

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let resolved = toml::to_string(&cfg).context("serializing the resolved config")?;
    let mut files = vec![(RESOLVED_CONFIG.to_string(), resolved)];
    files.extend(outcome.files);
    files.sort_by(|a, b| a.0.cmp(&b.0));
    for (name, body) in &files {
        write(&cfg.out, name, body)?;
    }
    let manifest = Manifest {
        tool: "hqctd",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        seed: cfg.seed,
        config: RESOLVED_CONFIG,
        files: files
            .iter()
            .map(|(path, body)| ManifestFile {
                path: path.clone(),
                bytes: body.len(),
            })
            .collect(),
    };
    write(
        &cfg.out,
        "manifest.json",
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;

    print!("{}", outcome.report);
    println!("wrote {} files to {}", files.len() + 1, cfg.out.display());
    for f in &outcome.failures {
        eprintln!("check failed: {f}");
    }
    Ok(!cli.check || outcome.failures.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
