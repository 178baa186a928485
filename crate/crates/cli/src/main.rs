mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Run;
use config::RunConfig;
use owc_core::control::Model;
use owc_core::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "owc", version, about = "OWC device, power-matrix and park-layout runs")]
struct Cli {
    /// TOML run configuration; defaults use the built-in example data.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated seed list.
    #[arg(long, global = true, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    /// linear or nonlinear.
    #[arg(long, global = true)]
    model: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Nonlinear time-domain run of one device.
    DeviceSim,
    /// Optimal-control power matrix over an Hs × Te grid.
    PowerMatrix,
    /// Annual power over cylinder radius and draft.
    DimSweep,
    /// Random layouts and projected-gradient layout optimization.
    ParkOpt,
    /// Linear versus nonlinear power of stored layouts.
    ParkVerify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::DeviceSim => "device-sim",
            Command::PowerMatrix => "power-matrix",
            Command::DimSweep => "dim-sweep",
            Command::ParkOpt => "park-opt",
            Command::ParkVerify => "park-verify",
        }
    }
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    model: String,
    seeds: &'a [u64],
    config: &'a RunConfig,
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = cli.out {
        config.out = Some(o);
    }
    if let Some(m) = &cli.model {
        config.model = Some(m.clone());
    }
    if let Some(s) = cli.seed {
        config.seeds = Some(s);
    }
    let model: Model = config.model.as_deref().unwrap_or("linear").parse()?;
    let seeds = config.seeds.clone().unwrap_or_else(|| vec![0]);
    if seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|source| Error::Io {
        path: out.display().to_string(),
        source,
    })?;
    // output location is left out so identical runs in different directories match
    let recorded = RunConfig {
        out: None,
        ..config.clone()
    };
    let resolved = toml::to_string(&recorded).map_err(|e| Error::Config(e.to_string()))?;
    let meta = RunMeta {
        command: cli.command.name(),
        version: owc_core::VERSION,
        config_sha256: hex::encode(Sha256::digest(resolved.as_bytes())),
        model: model.to_string(),
        seeds: &seeds,
        config: &recorded,
    };
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("plain data serializes");
    meta_text.push('\n');
    let run = Run { config, out, model, seeds };
    commands::write(&run.out, "run_meta.json", &meta_text)?;
    match cli.command {
        Command::DeviceSim => commands::device_sim(&run),
        Command::PowerMatrix => commands::power_matrix(&run, cli.model.is_some()),
        Command::DimSweep => commands::dim_sweep(&run),
        Command::ParkOpt => commands::park_opt(&run),
        Command::ParkVerify => commands::park_verify(&run),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
