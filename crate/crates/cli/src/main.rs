use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use diverge::config::{ExperimentKind, ExperimentSpec};
use diverge::experiments;

/// Diverge junction experiments: analytical vs numerical checks, resolution
/// studies, flux maps and the property suite.
///
/// Exit status: 0 when every check passes, 1 on a verification failure,
/// 2 on a usage or configuration error.
#[derive(Parser)]
#[command(name = "diverge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare a simulated Riemann problem with the analytical solution.
    RiemannVerify(Common),
    /// Model-vs-reference difference eps(t) over a list of resolutions.
    Converge(Common),
    /// Fluxes and binding regions over a (D0, S1, S2) grid.
    FluxMap(Common),
    /// Randomized and grid property checks, including the brute-force oracle.
    Props(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the CSV tables and report.txt.
    #[arg(long)]
    out: PathBuf,
    /// Random seed; overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (kind, args) = match cli.command {
        Command::RiemannVerify(a) => (ExperimentKind::RiemannVerify, a),
        Command::Converge(a) => (ExperimentKind::Convergence, a),
        Command::FluxMap(a) => (ExperimentKind::FluxMap, a),
        Command::Props(a) => (ExperimentKind::PropertySuite, a),
    };
    let spec = ExperimentSpec::from_file(&args.config, Some(kind), args.seed)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(Failure::Usage)?;
    let report = experiments::run(&spec).map_err(|e| Failure::Run(e.into()))?;
    report
        .write_to(&args.out)
        .with_context(|| format!("writing to {}", args.out.display()))
        .map_err(Failure::Run)?;
    print!("{}", report.render());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
