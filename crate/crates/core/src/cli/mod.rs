//! Command-line front end: configuration, orchestration and reproducible artifacts.
//!
//! Every command writes under `<out>/<command>/` plus `<out>/config.json`
//! (the effective configuration) and `<out>/manifest.json`, which lists
//! each artifact with its SHA-256. Nothing written depends on wall-clock
//! time or thread count.

mod config;
mod output;
mod pipeline;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{
    parse_config, Check, Criteria, ExperimentConfig, MartingaleSpec, Overrides, PdeSpec, Process,
};
pub use output::{sha256_hex, Csv, FileEntry, OutputDir};
pub use pipeline::{replica_key, Criterion};

use crate::error::{Error, Result};
use pipeline::Context;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CRITERION_FAILED: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spreadhydro", version, about = "Exclusion processes with spreading: simulation, PDE solvers and convergence checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the replica count per N.
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Output directory (default: the configuration's, else `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for replicas (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the event log of the dumped replicas.
    #[arg(long)]
    pub emit_event_log: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the right-sided process (or plain exclusion) and record observables.
    SimEprs(CommonArgs),
    /// Simulate the centered-spreading process and record observables.
    SimEpcs(CommonArgs),
    /// Simulate the coupled system and check the second-class particle bounds.
    SimCoupled(CommonArgs),
    /// Solve the hydrodynamic equation of the configured process.
    SolvePde(CommonArgs),
    /// Compare ensemble means of the empirical measure against the PDE.
    VerifyHydro(CommonArgs),
    /// Check the law of large numbers for the number of shifts.
    VerifyWlln(CommonArgs),
    /// Mean-zero, quadratic-variation and scaling checks of the Dynkin martingale.
    VerifyMartingale(CommonArgs),
    /// Compare the transformed right-sided solution with the centered one.
    VerifyTransform(CommonArgs),
    /// Run the checks listed in the configuration.
    Run(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SimEprs(_) => "sim-eprs",
            Command::SimEpcs(_) => "sim-epcs",
            Command::SimCoupled(_) => "sim-coupled",
            Command::SolvePde(_) => "solve-pde",
            Command::VerifyHydro(_) => "verify-hydro",
            Command::VerifyWlln(_) => "verify-wlln",
            Command::VerifyMartingale(_) => "verify-martingale",
            Command::VerifyTransform(_) => "verify-transform",
            Command::Run(_) => "run",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::SimEprs(a)
            | Command::SimEpcs(a)
            | Command::SimCoupled(a)
            | Command::SolvePde(a)
            | Command::VerifyHydro(a)
            | Command::VerifyWlln(a)
            | Command::VerifyMartingale(a)
            | Command::VerifyTransform(a)
            | Command::Run(a) => a,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_file_sha256: Option<String>,
    effective_config_sha256: String,
    seed: u64,
    n_list: &'a [usize],
    replicas: u64,
    /// How replica streams are derived from the seed.
    rng: &'static str,
    criteria: &'a [Criterion],
    files: Vec<FileEntry>,
}

/// Outcome of one command.
#[derive(Debug)]
pub struct Outcome {
    pub criteria: Vec<Criterion>,
    pub out_dir: PathBuf,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

fn checks_for(name: &str, cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let sim_needs = |allowed: &[Process]| {
        if allowed.contains(&cfg.process) {
            Ok(())
        } else {
            Err(Error::config(
                "process",
                format!("{name} needs process {allowed:?}, got {:?}", cfg.process),
            ))
        }
    };
    Ok(match name {
        "sim-eprs" => {
            sim_needs(&[Process::Eprs, Process::Ssep])?;
            vec![Check::Simulate]
        }
        "sim-epcs" => {
            sim_needs(&[Process::Epcs])?;
            vec![Check::Simulate]
        }
        "sim-coupled" => vec![Check::Coupling],
        "solve-pde" => vec![Check::SolvePde],
        "verify-hydro" => vec![Check::Hydro],
        "verify-wlln" => vec![Check::Wlln],
        "verify-martingale" => vec![Check::Martingale],
        "verify-transform" => vec![Check::Transform],
        "run" => cfg.run_checks(),
        other => return Err(Error::InvalidParams(format!("unknown command {other}"))),
    })
}

/// Runs command `name` on a validated configuration, writing into `out_dir`.
/// `raw` is the configuration file as read, hashed into the manifest.
pub fn execute(
    name: &str,
    cfg: &ExperimentConfig,
    raw: Option<&[u8]>,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<Outcome> {
    cfg.validate()?;
    let checks = checks_for(name, cfg)?;
    let mut out = OutputDir::create(out_dir)?;
    let effective = serde_json::to_string_pretty(cfg)? + "\n";
    out.write("config.json", effective.as_bytes())?;
    let mut criteria = Vec::new();
    for check in checks {
        let mut ctx = Context {
            cfg,
            threads,
            out: &mut out,
        };
        criteria.extend(pipeline::run_check(&mut ctx, check)?);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        config_file_sha256: raw.map(sha256_hex),
        effective_config_sha256: sha256_hex(effective.as_bytes()),
        seed: cfg.seed,
        n_list: &cfg.n_list,
        replicas: cfg.replicas,
        rng: "ChaCha8 keyed by (seed, N << 32 | replica); streams 1 dynamics, 2 event times, 3 initial configuration, 4 coupling; standalone runs paired with coupled replicas set bit 31",
        criteria: &criteria,
        files: out.files(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(out.root().join("manifest.json"), text)?;
    Ok(Outcome {
        criteria,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Reads, overrides and validates the configuration of `args`.
pub fn load(args: &CommonArgs) -> Result<(ExperimentConfig, Vec<u8>)> {
    let raw = std::fs::read(&args.config).map_err(|e| {
        Error::config("--config", format!("cannot read {}: {e}", args.config.display()))
    })?;
    let text = std::str::from_utf8(&raw).map_err(|_| Error::config("--config", "file is not UTF-8"))?;
    let mut cfg = parse_config(text)?;
    cfg.apply(&Overrides {
        seed: args.seed,
        replicas: args.replicas,
        output_dir: args.out.clone(),
        emit_event_log: args.emit_event_log,
    })?;
    Ok((cfg, raw))
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_PASS };
        }
    };
    let name = cli.command.name();
    let args = cli.command.args();
    let started = Instant::now();
    let result = load(args).and_then(|(cfg, raw)| {
        let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        execute(name, &cfg, Some(&raw), &dir, args.threads)
    });
    match result {
        Ok(outcome) => {
            for c in &outcome.criteria {
                println!("{}", c.line());
            }
            println!(
                "{name}: {} criteria, artifacts in {} ({:.1} s)",
                outcome.criteria.len(),
                outcome.out_dir.display(),
                started.elapsed().as_secs_f64()
            );
            if outcome.passed() {
                EXIT_PASS
            } else {
                EXIT_CRITERION_FAILED
            }
        }
        // runtime failures are not verdicts either, so they share the configuration code
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG_ERROR
        }
    }
}
