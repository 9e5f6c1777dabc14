//! `sinai-lab`: command-line front end for the random-walk-in-random-
//! environment toolkit.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime failure,
//! 3 verification-suite failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{FileConfig, SignChangesMode};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(1),
            CliError::Runtime(_) => ExitCode::from(2),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sinai-lab", version, about = "Random walk in random environment laboratory")]
struct Cli {
    /// JSON config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (also SINAI_LAB_WORKERS); 0 = one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one quenched walk and emit its trajectory record.
    Simulate(SimulateArgs),
    /// Cross-validate the closed-form formulas against simulation.
    VerifyFormulas(VerifyArgs),
    /// Decompose a path into its x-extrema.
    Extrema(ExtremaArgs),
    /// Sweep valley-bottom sign changes, or run the rate/constant studies.
    SignChanges(SignChangesArgs),
    /// Run an annealed persistence campaign and fit the decay exponent.
    Persistence(PersistenceArgs),
    /// Tabulate the sign-change rate function and locate its zero.
    RateFunction(RateFunctionArgs),
    /// Endpoint-versus-valley-bottom localization diagnostic.
    Localization(LocalizationArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    half_width: Option<u32>,
    /// Also emit (n, S_n, running_sum) rows.
    #[arg(long)]
    stream: bool,
    /// Also emit the sampled environment as JSON.
    #[arg(long)]
    emit_env: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    cases: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Debug, Args)]
struct ExtremaArgs {
    #[arg(long)]
    scale: Option<f64>,
    /// Path source: bm | potential.
    #[arg(long)]
    source: Option<String>,
}

#[derive(Debug, Args)]
struct SignChangesArgs {
    /// record | rate | constant.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Debug, Args)]
struct PersistenceArgs {
    /// Comma-separated horizon list, e.g. 100,1000,10000.
    #[arg(long)]
    horizons: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Debug, Args)]
struct RateFunctionArgs {
    #[arg(long)]
    x_max: Option<f64>,
}

#[derive(Debug, Args)]
struct LocalizationArgs {
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
}

fn parse_source(s: &str) -> Result<config::PathSource, CliError> {
    match s {
        "bm" => Ok(config::PathSource::Bm),
        "potential" => Ok(config::PathSource::Potential),
        other => Err(CliError::Validation(format!(
            "unknown path source '{other}' (expected bm|potential)"
        ))),
    }
}

fn parse_mode(s: &str) -> Result<SignChangesMode, CliError> {
    match s {
        "record" => Ok(SignChangesMode::Record),
        "rate" => Ok(SignChangesMode::Rate),
        "constant" => Ok(SignChangesMode::Constant),
        other => Err(CliError::Validation(format!(
            "unknown sign-changes mode '{other}' (expected record|rate|constant)"
        ))),
    }
}

fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag.or(file) {
        return Ok(w);
    }
    match std::env::var("SINAI_LAB_WORKERS") {
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::Validation(format!("SINAI_LAB_WORKERS must be an integer, got '{s}'"))
        }),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let workers = resolve_workers(cli.workers, file.workers)?;
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let out = cli
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Simulate(args) => {
            let mut block = file.simulate.clone().unwrap_or_default();
            if let Some(n) = args.steps {
                block.n_steps = n;
            }
            if let Some(h) = args.half_width {
                block.half_width = h;
            }
            block.stream |= args.stream;
            block.emit_env |= args.emit_env;
            commands::simulate(&file, block, seed, &out)
        }
        Command::VerifyFormulas(args) => {
            let mut block = file.verify_formulas.clone().unwrap_or_default();
            if let Some(c) = args.cases {
                block.n_cases = c;
            }
            if let Some(t) = args.trials {
                block.trials_per_case = t;
            }
            commands::verify_formulas(&file, block, seed, &out)
        }
        Command::Extrema(args) => {
            let mut block = file.extrema.clone().unwrap_or_default();
            if let Some(x) = args.scale {
                block.scale = x;
            }
            if let Some(s) = &args.source {
                block.source = parse_source(s)?;
            }
            commands::extrema(&file, block, seed, &out)
        }
        Command::SignChanges(args) => {
            let mut block = file.sign_changes.clone().unwrap_or_default();
            if let Some(m) = &args.mode {
                block.mode = parse_mode(m)?;
            }
            if let Some(x) = args.x_max {
                block.x_max = x;
            }
            if let Some(n) = args.samples {
                block.n_samples = n;
            }
            commands::sign_changes(&file, block, seed, &out)
        }
        Command::Persistence(args) => {
            let mut block = file.persistence.clone().unwrap_or_default();
            if let Some(spec) = &args.horizons {
                block.horizons = spec
                    .split(',')
                    .map(|tok| {
                        tok.trim().parse::<u64>().map_err(|_| {
                            CliError::Validation(format!("bad horizon '{tok}' in --horizons"))
                        })
                    })
                    .collect::<Result<Vec<u64>, CliError>>()?;
            }
            if let Some(t) = args.trials {
                block.n_envs = t;
            }
            commands::persistence(&file, block, seed, &out)
        }
        Command::RateFunction(args) => {
            let mut block = file.rate_function.clone().unwrap_or_default();
            if let Some(x) = args.x_max {
                block.x_max = x;
            }
            commands::rate_function(&file, block, seed, &out)
        }
        Command::Localization(args) => {
            let mut block = file.localization.clone().unwrap_or_default();
            if let Some(n) = args.steps {
                block.n_steps = n;
            }
            if let Some(t) = args.trials {
                block.n_trials = t;
            }
            commands::localization(&file, block, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
