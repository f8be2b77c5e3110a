//! Command-line front end: environment generation, simulation runs,
//! rescheduling scenario replays and metric reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::EnvConfig;
use crate::metrics::{metrics_from_csv, metrics_to_csv, samples_from_csv, samples_to_csv};
use crate::report::{figure_files, render_summary, summarize};
use crate::scenario::{render_report, run_scenario, Scenario};
use crate::sim::{generate_environment, SimState};

#[derive(Parser, Debug)]
#[command(name = "staffsim", version, about = "Workforce staffing and profiling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a pseudo-random initial environment.
    GenEnv(GenEnvArgs),
    /// Run the closed simulation loop and write metrics.
    Run(RunArgs),
    /// Replay a rescheduling scenario and print the schedule diff.
    RescheduleDemo(RescheduleArgs),
    /// Summarize a finished run's metric files.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenEnvArgs {
    /// Config JSON; defaults apply to missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generic config override, repeatable: --set key=json_value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Environment JSON produced by gen-env.
    #[arg(long)]
    pub env: PathBuf,
    /// Steps to simulate; defaults to the config's total_steps.
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
    /// Step from which feedback becomes unbiased.
    #[arg(long)]
    pub bias_off_at: Option<u32>,
    /// Beam width override.
    #[arg(long)]
    pub beam: Option<usize>,
    /// Seed override; regenerates the environment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generic config override, repeatable: --set key=json_value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args, Debug)]
pub struct RescheduleArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Optional JSON report destination; the diff always prints.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding metrics.csv and optimality.csv.
    #[arg(long)]
    pub dir: PathBuf,
}

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Json { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))
}

/// Apply `--set key=json_value` pairs by merging into the config's JSON
/// object. Values that fail to parse as JSON are taken as strings.
fn apply_overrides(cfg: &EnvConfig, pairs: &[String]) -> Result<EnvConfig, CliError> {
    if pairs.is_empty() {
        return Ok(cfg.clone());
    }
    let mut value = serde_json::to_value(cfg)
        .map_err(|e| CliError::Internal(format!("config reserialization failed: {e}")))?;
    let obj = value
        .as_object_mut()
        .expect("EnvConfig serializes to an object");
    for pair in pairs {
        let Some((key, raw)) = pair.split_once('=') else {
            return Err(CliError::Config(format!(
                "override `{pair}` is not of the form key=value"
            )));
        };
        let parsed = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        obj.insert(key.to_string(), parsed);
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("override rejected: {e}")))
}

fn load_config(args: &GenEnvArgs) -> Result<EnvConfig, CliError> {
    let base: EnvConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => EnvConfig::default(),
    };
    let mut cfg = apply_overrides(&base, &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn cmd_gen_env(args: &GenEnvArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let state = generate_environment(&cfg);
    write_text(&args.out, &to_json(&state)?)?;
    println!(
        "environment with {} workers written to {}",
        state.workers.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a EnvConfig,
    seed: u64,
    code_version: &'static str,
    outputs: Vec<String>,
    wall_clock_ms: u128,
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut state: SimState = read_json(&args.env)?;

    let mut cfg = apply_overrides(&state.config, &args.set)?;
    if let Some(off) = args.bias_off_at {
        cfg.bias_off_at = Some(off);
    }
    if let Some(beam) = args.beam {
        cfg.beam_width = beam;
    }
    let reseeded = args.seed.is_some_and(|s| s != cfg.seed);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if reseeded {
        state = generate_environment(&cfg);
    } else {
        state.bias.sigma_b = cfg.sigma_b;
        state.bias.bias_off_at = cfg.bias_off_at;
        state.profiles.gamma = cfg.gamma;
        state.config = cfg;
    }

    let steps = args.steps.unwrap_or(state.config.total_steps);
    state
        .run(steps)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let metrics_path = args.out.join("metrics.csv");
    let samples_path = args.out.join("optimality.csv");
    let state_path = args.out.join("final_state.json");
    let manifest_path = args.out.join("manifest.json");

    write_text(&metrics_path, &metrics_to_csv(&state.metrics))?;
    write_text(&samples_path, &samples_to_csv(&state.samples))?;
    write_text(&state_path, &to_json(&state)?)?;
    let manifest = RunManifest {
        config: &state.config,
        seed: state.config.seed,
        code_version: env!("CARGO_PKG_VERSION"),
        outputs: vec![
            metrics_path.display().to_string(),
            samples_path.display().to_string(),
            state_path.display().to_string(),
        ],
        wall_clock_ms: started.elapsed().as_millis(),
    };
    write_text(&manifest_path, &to_json(&manifest)?)?;
    println!(
        "{steps} steps simulated, outputs in {}",
        args.out.display()
    );
    Ok(())
}

pub fn cmd_reschedule_demo(args: &RescheduleArgs) -> Result<(), CliError> {
    let mut state: SimState = read_json(&args.env)?;
    let scenario: Scenario = read_json(&args.scenario)?;
    let report =
        run_scenario(&mut state, &scenario).map_err(|e| CliError::Internal(e.to_string()))?;
    print!("{}", render_report(&report));
    if let Some(out) = &args.out {
        write_text(out, &to_json(&report)?)?;
    }
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let metrics_path = args.dir.join("metrics.csv");
    let samples_path = args.dir.join("optimality.csv");
    let rows = metrics_from_csv(&read_text(&metrics_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", metrics_path.display())))?;
    let samples = samples_from_csv(&read_text(&samples_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", samples_path.display())))?;
    match summarize(&rows, &samples) {
        Some(summary) => print!("{}", render_summary(&summary)),
        None => println!("no metric rows"),
    }
    for (name, content) in figure_files(&rows, &samples) {
        write_text(&args.dir.join(name), &content)?;
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenEnv(args) => cmd_gen_env(args),
        Command::Run(args) => cmd_run(args),
        Command::RescheduleDemo(args) => cmd_reschedule_demo(args),
        Command::Report(args) => cmd_report(args),
    }
}
