use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperlab_cli::{run_to_bytes, Command, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(
    name = "hyperlab",
    version,
    about = "Ornstein-Uhlenbeck hypercontractivity laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Q(t) along the heat flow on a time grid.
    Qcurve(Params),
    /// Supersolution residuals of u and of its transform.
    Closure(Params),
    /// Hypercontractivity ratio over an s-sweep around the critical time.
    Hyper(Params),
    /// Two-point sweeps on the hypercube.
    Boolean(Params),
    /// The full invariant battery; exits nonzero on any failure.
    Selftest(Params),
}

#[derive(clap::Args)]
struct Params {
    /// Parameters such as p=2 q=4 preset=bump out=q.csv format=csv.
    #[arg(value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn execute(cli: Cli) -> Result<bool, RunError> {
    let (command, params) = match cli.command {
        Sub::Qcurve(p) => (Command::Qcurve, p.params),
        Sub::Closure(p) => (Command::Closure, p.params),
        Sub::Hyper(p) => (Command::Hyper, p.params),
        Sub::Boolean(p) => (Command::Boolean, p.params),
        Sub::Selftest(p) => (Command::Selftest, p.params),
    };
    let config = ExperimentConfig::from_params(command, &params)?;
    let (bytes, outcome) = run_to_bytes(&config)?;
    match &config.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    eprintln!("{}", outcome.summary);
    Ok(command != Command::Selftest || outcome.passed)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
