use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use singmech_cli::commands::{self, SimulateArgs};
use singmech_cli::Output;

#[derive(Parser)]
#[command(name = "singmech", version, about = "Analysis and simulation of singular Lagrangian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Run {
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long, default_value_t = 10.0)]
    t1: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Initial values as name=value, comma separated.
    #[arg(long)]
    init: Vec<String>,
    #[arg(long, default_value = "rk4")]
    method: String,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the analysis report as JSON.
    Analyze {
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integrate the reduced equations and print a CSV trajectory.
    Simulate {
        model: PathBuf,
        #[command(flatten)]
        run: Run,
        /// Observable as `name=expr` or a bare expression.
        #[arg(long)]
        observable: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite.
    Verify {
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Integrability report and path endpoints for a multi-time system.
    Multitime {
        /// Model file or Hamiltonian file.
        file: PathBuf,
        #[arg(long = "path")]
        paths: Vec<PathBuf>,
        #[arg(long)]
        init: Vec<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the reduced trajectory with the reference solution.
    Compare {
        model: PathBuf,
        #[command(flatten)]
        run: Run,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn simulate_args(run: Run, observables: Vec<String>, out: Option<PathBuf>) -> SimulateArgs {
    SimulateArgs { t0: run.t0, t1: run.t1, dt: run.dt, init: run.init, observables, method: run.method, out, seed: run.seed }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Analyze { model, seed } => commands::analyze(&model, seed),
        Command::Simulate { model, run, observable, out } => commands::simulate(&model, &simulate_args(run, observable, out)),
        Command::Verify { model, seed, samples, tol } => commands::verify(&model, seed, samples, tol),
        Command::Multitime { file, paths, init, steps, seed } => commands::multitime(&file, &paths, &init, steps, seed),
        Command::Compare { model, run, tol } => commands::compare(&model, &simulate_args(run, Vec::new(), None), tol),
    };
    let out = result.unwrap_or_else(|e| Output { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() });
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
