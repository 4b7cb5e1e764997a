//! Command-line front end: single solves, parameter sweeps, Monte Carlo
//! validation of the rate model, and scenario generation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hstn_core::experiments::{write_summary_csv, write_sweep_csv, write_validation_csv, RunOptions, SolveReport};
use hstn_core::rng::{stream, stream_id};
use hstn_core::scenario::{Realization, ScenarioFile};
use hstn_core::{algorithm1, run_sweep, validate_approx, ExperimentSpec, LargeScaleState};

#[derive(Parser)]
#[command(name = "hstn", version, about = "Power and channel allocation for satellite-terrestrial spectrum sharing")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON input file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed from the input file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario file and print the assignment and rates as JSON.
    Solve(Common),
    /// Run an experiment spec and write one CSV row per user and trial.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write the per-point trial averages to this CSV file.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Record wall-clock times (makes the output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Compare the deterministic-equivalent rate with Monte Carlo estimates.
    ValidateApprox {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo samples per pair.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Draw a deployment and write it as a scenario file.
    GenScenario(Common),
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_spec(common: &Common) -> Result<ExperimentSpec> {
    let mut spec = match &common.config {
        Some(path) => ExperimentSpec::from_json(&read(path)?)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn load_scenario(common: &Common) -> Result<ScenarioFile> {
    Ok(match &common.config {
        Some(path) => ScenarioFile::from_json(&read(path)?)?,
        None => ScenarioFile::default(),
    })
}

/// Stored realization when present, otherwise a fresh draw from the seed.
fn realize(file: &ScenarioFile, seed: Option<u64>) -> Result<Realization> {
    let cfg = file.to_config()?;
    if let (Some(r), None) = (&file.realization, seed) {
        return Ok(r.clone());
    }
    let seed = seed.unwrap_or(0);
    let (geometry, large_scale) = LargeScaleState::sample(&cfg, &mut stream(seed, stream_id(0, 0, 0)))?;
    Ok(Realization { seed, geometry, large_scale })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(common) => {
            let file = load_scenario(&common)?;
            let cfg = file.to_config()?;
            let r = realize(&file, common.seed)?;
            let alloc = algorithm1(&r.large_scale, &cfg)?;
            let report = SolveReport::new(&alloc, &r.large_scale, &cfg);
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            emit(common.out.as_deref(), json.as_bytes())
        }
        Command::Sweep { common, summary, timing } => {
            let spec = load_spec(&common)?;
            let result = run_sweep(&spec, RunOptions { record_timing: timing })?;
            let mut buf = Vec::new();
            write_sweep_csv(&result, &mut buf)?;
            emit(common.out.as_deref(), &buf)?;
            if let Some(path) = summary {
                let mut buf = Vec::new();
                write_summary_csv(&result, &mut buf)?;
                emit(Some(&path), &buf)?;
            }
            Ok(())
        }
        Command::ValidateApprox { common, samples } => {
            let mut spec = load_spec(&common)?;
            if common.config.is_none() {
                spec.mc_validation.enabled = true;
            }
            if let Some(n) = samples {
                spec.mc_validation.samples = n;
            }
            let report = validate_approx(&spec)?;
            let mut buf = Vec::new();
            write_validation_csv(&report, &mut buf)?;
            emit(common.out.as_deref(), &buf)?;
            eprintln!("median relative gap {:.4}%, max {:.4}%", 100.0 * report.median_gap, 100.0 * report.max_gap);
            Ok(())
        }
        Command::GenScenario(common) => {
            let mut file = load_scenario(&common)?;
            let r = realize(&file, Some(common.seed.unwrap_or(0)))?;
            file.realization = Some(r);
            let mut json = file.to_json();
            json.push('\n');
            emit(common.out.as_deref(), json.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
