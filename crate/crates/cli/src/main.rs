//! `landscape`: experiments over loss–complexity model landscapes.
//!
//! Subcommands: `run` (full experiment with all artifacts), `sweep`
//! (simulated-annealing reconstruction of d*(λ)), `check` (seeded
//! self-tests). Exit codes: 0 success, 1 I/O failure, 2 invalid
//! configuration, 3 numerical failure or failed self-test.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use landscape_cli::config::{ConfigError, ExperimentConfig};
use landscape_cli::sweep::{self, SweepOptions};
use landscape_cli::{check, runner};
use landscape_core::sampler::AnnealingConfig;
use landscape_core::{Error, Family};

#[derive(Parser)]
#[command(
    name = "landscape",
    version,
    about = "Loss-complexity landscape experiments over enumerable model families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment end to end and write every artifact.
    Run(RunArgs),
    /// Reconstruct d*(lambda) by simulated annealing across the lambda grid.
    Sweep(SweepArgs),
    /// Run the duality and detailed-balance self-tests.
    Check(CheckArgs),
}

/// Configuration layering shared by `run` and `sweep`: built-in defaults,
/// then `--profile`, then the `--config` file, then individual flags.
#[derive(Args)]
struct ConfigArgs {
    /// Start from a named profile.
    #[arg(long, value_parser = ExperimentConfig::PROFILE_NAMES)]
    profile: Option<String>,
    /// Apply `key = value` lines from this file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Model family: polynomial, fourier, or tree.
    #[arg(long)]
    family: Option<Family>,
    /// Target frequency n in sin(2n*pi*x).
    #[arg(long)]
    freq_n: Option<u32>,
    /// Training sample count.
    #[arg(long)]
    n_train: Option<usize>,
    /// Test sample count.
    #[arg(long)]
    n_test: Option<usize>,
    /// Noise standard deviation.
    #[arg(long = "sigma")]
    noise_sigma: Option<f64>,
    /// Largest family index to enumerate (degree, mode count, or depth).
    #[arg(long)]
    max_index: Option<u32>,
    /// Smallest grid lambda (0 switches the grid to linear spacing).
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Largest grid lambda.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    lambda_count: Option<usize>,
    /// Gibbs temperature for the susceptibility scan.
    #[arg(long)]
    temperature: Option<f64>,
    /// Seed for data noise and chains.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving all output files.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = match &self.profile {
            Some(name) => ExperimentConfig::profile(name).ok_or_else(|| {
                CliError::Config(ConfigError(vec![format!("profile: unknown name {name:?}")]))
            })?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| {
                CliError::Io(Error::Io {
                    path: path.display().to_string(),
                    source,
                })
            })?;
            config.apply_config_text(&text).map_err(CliError::Config)?;
        }
        if let Some(v) = self.family {
            config.family = v;
        }
        if let Some(v) = self.freq_n {
            config.freq_n = v;
        }
        if let Some(v) = self.n_train {
            config.n_train = v;
        }
        if let Some(v) = self.n_test {
            config.n_test = v;
        }
        if let Some(v) = self.noise_sigma {
            config.noise_sigma = v;
        }
        if let Some(v) = self.max_index {
            config.max_index = v;
        }
        if let Some(v) = self.lambda_min {
            config.lambda_min = v;
        }
        if let Some(v) = self.lambda_max {
            config.lambda_max = v;
        }
        if let Some(v) = self.lambda_count {
            config.lambda_count = v;
        }
        if let Some(v) = self.temperature {
            config.temperature = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = &self.output_dir {
            config.output_dir = v.clone();
        }
        config.validate().map_err(CliError::Config)?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Cooling factor applied after each temperature level.
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    /// Metropolis steps per temperature level.
    #[arg(long, default_value_t = 200)]
    steps_per_temperature: u32,
    /// Temperature at which the schedule stops.
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    /// Starting temperature; defaults to 10x the action range per lambda.
    #[arg(long)]
    t0: Option<f64>,
    /// Also write the first-lambda chain trace to chain_trace.csv.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Seed for the self-test landscapes.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Io(Error),
    Numerical(Error),
    CheckFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Numerical(_) | CliError::CheckFailed => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io(e) | CliError::Numerical(e) => write!(f, "error: {e}"),
            CliError::CheckFailed => write!(f, "error: one or more self-tests failed"),
        }
    }
}

/// Core errors signal I/O trouble (exit 1) or a numerical/runtime failure
/// (exit 3); config problems never reach this point.
fn classify(e: Error) -> CliError {
    match e {
        Error::Io { .. } | Error::CsvFormat { .. } => CliError::Io(e),
        other => CliError::Numerical(other),
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let config = args.config.resolve()?;
    let report = runner::run_experiment(&config).map_err(classify)?;
    println!("dataset: {}", report.dataset.tag());
    println!("space: {} {} models", report.space.len(), config.family);
    println!(
        "elbow alpha* = {}; {} envelope breakpoints",
        report.elbow_alpha_star,
        report.breakpoints.len()
    );
    println!("outputs written to {}", config.output_dir.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let config = args.config.resolve()?;
    let options = SweepOptions {
        gamma: args.gamma,
        steps_per_temperature: args.steps_per_temperature,
        t_min: args.t_min,
        t0: args.t0,
        trace: args.trace,
    };
    // Surface bad schedule knobs as configuration errors before any chains
    // run; the per-lambda auto t0 always clears t_min by construction.
    let probe = AnnealingConfig {
        t0: options.t0.unwrap_or(10.0 * options.t_min),
        t_min: options.t_min,
        gamma: options.gamma,
        steps_per_temperature: options.steps_per_temperature,
        lambda: 0.0,
        seed: 0,
    };
    probe
        .validate()
        .map_err(|e| CliError::Config(ConfigError(vec![e.to_string()])))?;

    let (rows, trace) = sweep::run_sweep(&config, &options).map_err(classify)?;
    sweep::write_sweep_outputs(&config, &rows, trace.as_deref()).map_err(classify)?;
    let hits = rows.iter().filter(|r| r.matches_exact).count();
    println!(
        "annealed winners match the exact envelope at {hits}/{} grid points",
        rows.len()
    );
    println!("outputs written to {}", config.output_dir.display());
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let outcomes = check::run_checks(args.seed);
    let mut all_passed = true;
    for outcome in &outcomes {
        println!(
            "check {}: {} ({})",
            outcome.name,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
        all_passed &= outcome.passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprint!("{err}");
            eprintln!();
            ExitCode::from(err.exit_code())
        }
    }
}
