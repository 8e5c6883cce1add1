use std::path::PathBuf;
use std::process::ExitCode;

use abshift_cli::error::{EXIT_CONFIG, EXIT_OK};
use abshift_cli::{load_config, run, ConfigError, RunConfig, Scenario};
use clap::{Args, Parser, Subcommand};

/// Aharonov-Bohm velocity-shift simulator.
#[derive(Parser)]
#[command(name = "abshift", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Velocity distribution and Fourier coefficients with and without the flux phase.
    BeforeAfter(RunArgs),
    /// Two-position velocity measurement of the two-branch state.
    MeasuredAb(RunArgs),
    /// Branches with relative velocity, before and after an annulling impulse.
    RelativeVelocity(RunArgs),
    /// Flux inserted and removed while the branches pass, then recombined.
    FluxInsertRemove(RunArgs),
    /// CGS feasibility bounds for a physical realization.
    Feasibility(RunArgs),
    /// Parameter sweep described by the [sweep] section.
    Sweep(RunArgs),
    /// Runs whatever scenario the config file names.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides sampling.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn thread_pool() -> Result<(), String> {
    let Ok(v) = std::env::var("ABSHIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("ABSHIFT_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn prepare(args: &RunArgs, scenario: Option<Scenario>) -> Result<RunConfig, ConfigError> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.sampling.seed = seed;
    }
    cfg.resolve(scenario)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let (args, scenario) = match &cli.command {
        Command::BeforeAfter(a) => (a, Some(Scenario::BeforeAfter)),
        Command::MeasuredAb(a) => (a, Some(Scenario::MeasuredAb)),
        Command::RelativeVelocity(a) => (a, Some(Scenario::RelativeVelocity)),
        Command::FluxInsertRemove(a) => (a, Some(Scenario::FluxInsertRemove)),
        Command::Feasibility(a) => (a, Some(Scenario::Feasibility)),
        Command::Sweep(a) => (a, Some(Scenario::Sweep)),
        Command::Run(a) => (a, None),
    };
    let cfg = match prepare(args, scenario) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = args.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    match run::execute(&cfg, &dir) {
        Ok(code) => {
            let scenario = cfg.scenario.map_or("run", |s| s.name());
            if code == EXIT_OK {
                println!("{scenario}: all checks passed; output in {}", dir.display());
            } else {
                eprintln!("{scenario}: finished with exit code {code}; see {}", dir.join("summary.json").display());
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
