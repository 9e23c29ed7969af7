use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use driven_qubits_cli::commands::{self, Command};
use driven_qubits_cli::config::{self, Format, RunConfig};
use driven_qubits_cli::{exit, CliError};

/// Driven coupled qubits: dynamics, steady states and entanglement maps.
#[derive(Debug, Parser)]
#[command(name = "dqubits", version, about)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    command: Command,

    /// TOML run configuration. Defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output file (default: `output.path` from the config, else stdout).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Output format (default: `output.format` from the config, else csv).
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Worker threads for grid evaluations; 0 picks the rayon default.
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Override `numerics.rtol`.
    #[arg(long)]
    rtol: Option<f64>,

    /// Override `numerics.atol`.
    #[arg(long)]
    atol: Option<f64>,

    /// Override `numerics.epsilon`, the entanglement threshold.
    #[arg(long)]
    epsilon: Option<f64>,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(x) = cli.rtol {
        cfg.numerics.rtol = x;
    }
    if let Some(x) = cli.atol {
        cfg.numerics.atol = x;
    }
    if let Some(x) = cli.epsilon {
        cfg.numerics.epsilon = x;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = load(&cli)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let outcome = commands::run(cli.command, &cfg)?;
    let format = cli.format.or(cfg.output.format).unwrap_or_default();
    let text = outcome.report.render(format)?;
    match cli.output.or(cfg.output.path) {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    debug_assert!([exit::OK, exit::CONFIG, exit::NUMERICAL, exit::DEGENERATE].contains(&code));
    ExitCode::from(code as u8)
}
