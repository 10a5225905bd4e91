use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrphase_cli::commands::{self, Options, DEFAULT_STEPS};
use lrphase_cli::{CliError, Format, RunConfig, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};

/// Phases of cyclic rotating-field spin loops and their conjugate partners.
#[derive(Parser)]
#[command(name = "lrphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Total, dynamical and geometric phases of both recurrent states.
    LoopPhases(Common),
    /// Run every applicable claim check; exit 1 if any fails.
    VerifyClaims(Common),
    /// One CSV row per sweep value.
    Sweep(Common),
    /// Gate-level report of a two-spin sequence.
    GateReport(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Step count for numeric propagator cross-checks.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Phase tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

type Handler = fn(&RunConfig, &Options) -> Result<commands::Rendered, CliError>;

fn run(cli: Cli) -> Result<bool, CliError> {
    let (common, command): (&Common, Handler) = match &cli.command {
        Command::LoopPhases(c) => (c, commands::loop_phases),
        Command::VerifyClaims(c) => (c, commands::verify_claims),
        Command::Sweep(c) => (c, commands::sweep),
        Command::GateReport(c) => (c, commands::gate_report),
    };
    let cfg = RunConfig::load(&common.config)?;
    let opts = Options {
        format: common.format,
        steps: common.steps,
        phase_tol: common.tol,
    };
    let rendered = command(&cfg, &opts)?;
    for w in &rendered.warnings {
        eprintln!("warning: {w}");
    }
    match common.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => fs::write(path, &rendered.body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(rendered.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
