//! `opalg` command line: the built-in two-level demo plus problem-file
//! driven runs. Exit codes: 0 when the run's checks pass, 1 when they
//! fail, 2 on input errors.

mod commands;
mod demo;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::ActionKind;
use problem::Params;

#[derive(Parser)]
#[command(name = "opalg", version, about = "Finite-dimensional operator algebras: contexts, valuations, ensembles, time averages, GNS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in two-level worked example and assert its identities
    Demo,
    /// Run a subcommand against a JSON problem file
    Run {
        /// Path to the problem file
        problem: PathBuf,
        #[command(subcommand)]
        action: Action,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Sample count (Monte Carlo) or verification trials (gns)
    #[arg(long)]
    n: Option<u64>,
    /// Master seed for all random streams
    #[arg(long)]
    seed: Option<u64>,
    /// Device label to measure through
    #[arg(long)]
    device: Option<String>,
    /// Half-width of the time-average integration window
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Quadrature steps
    #[arg(long)]
    steps: Option<usize>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the pass/fail tolerance of the subcommand
    #[arg(long = "tol-override")]
    tol_override: Option<f64>,
}

#[derive(Subcommand)]
enum Action {
    /// Monte Carlo ensemble mean against the trace oracle
    Average(RunOpts),
    /// Device-independence of ensemble means across all declared devices
    Representativity(RunOpts),
    /// Trapezoidal time average against the spectral pinching
    Timeavg(RunOpts),
    /// Ground-state value of the time average against the compression scalar
    Ergodicity(RunOpts),
    /// GNS representation construction and verification
    Gns(RunOpts),
    /// Noncontextual-assignment search over the declared device contexts
    Ks(RunOpts),
}

impl Action {
    fn split(&self) -> (ActionKind, &RunOpts) {
        match self {
            Action::Average(o) => (ActionKind::Average, o),
            Action::Representativity(o) => (ActionKind::Representativity, o),
            Action::Timeavg(o) => (ActionKind::Timeavg, o),
            Action::Ergodicity(o) => (ActionKind::Ergodicity, o),
            Action::Gns(o) => (ActionKind::Gns, o),
            Action::Ks(o) => (ActionKind::Ks, o),
        }
    }
}

impl RunOpts {
    fn as_params(&self) -> Params {
        Params {
            n: self.n,
            seed: self.seed,
            half_width: self.half_width,
            steps: self.steps,
            observable: None, // selected via the problem file
            device: self.device.clone(),
            tol_override: self.tol_override,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Demo => {
            if demo::run() {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run { problem, action } => {
            let (kind, opts) = action.split();
            let loaded = match problem::load(&problem) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let path_text = problem.display().to_string();
            match commands::execute(&loaded, &path_text, kind, &opts.as_params()) {
                Ok(report) => {
                    if let Err(e) = report.write(opts.out.as_deref()) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    if report.pass {
                        ExitCode::from(0)
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
