use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use halanay::Tolerance;
use halanay_cert::{run, CliError, Command, Config, Options};

/// Stability certificates and simulations for delay systems with
/// time-varying coefficients.
///
/// Exit codes: 0 certified, 1 refuted, 2 config error, 3 evaluation error,
/// 4 inconclusive or horizon too short, 5 integration overflow.
#[derive(Debug, Parser)]
#[command(name = "halanay-cert", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// output directory; overrides `outputs.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// relative tolerance of the oracles
    #[arg(long)]
    tolerance: Option<f64>,
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let cfg = Config::load(&cli.config)?;
    let tolerance = match cli.tolerance {
        Some(r) if r >= 0.0 && r.is_finite() => Tolerance::new(r),
        Some(r) => return Err(CliError::Config(format!("tolerance must be nonnegative, got {r}"))),
        None => Tolerance::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("halanay-out"));
    let opts = Options {
        out,
        seed: cli.seed.unwrap_or(cfg.seed),
        tolerance,
    };
    let outcome = run(cli.command, &cfg, &opts)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
