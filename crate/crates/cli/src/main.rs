use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use karcher_cli::commands::{
    cmd_flow, cmd_generate, cmd_mean, cmd_nodice, cmd_slln, FlowOptions, GenerateOptions, MeanOptions,
    NodiceOptions, SllnOptions,
};
use karcher_cli::verify::{cmd_verify, threads_from_env, VerifyOptions};
use karcher_cli::CliError;

#[derive(Parser)]
#[command(name = "karcher", version, about = "Karcher means of SPD matrices under the Thompson metric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the Karcher mean of a problem file.
    Mean {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic inductive mean; writes a CSV error trace.
    Nodice {
        #[arg(long)]
        input: PathBuf,
        /// Number of full cycles through the atoms.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write 0 in the wall_ns column so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Stochastic inductive mean; writes a CSV error trace.
    Slln {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Truncate draws farther than this from the mean.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Resolvent semigroup at time t, next to an explicit Euler solution of the gradient flow.
    Flow {
        #[arg(long)]
        input: PathBuf,
        /// JSON list of rows; defaults to the identity.
        #[arg(long)]
        x0: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-4)]
        flow_tol: f64,
        /// Euler steps.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Inner Karcher solver tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every stated inequality on random instances.
    Verify {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        flow_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use this slack for every check instead of the built-in ones.
        #[arg(long, allow_negative_numbers = true)]
        slack_override: Option<f64>,
    },
    /// Write a random problem file.
    Generate {
        #[arg(long)]
        dim: usize,
        /// Number of atoms.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.6)]
        scale: f64,
        /// Equal weights instead of random rational ones.
        #[arg(long)]
        uniform: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mean { input, tol, out } => cmd_mean(&MeanOptions { input, tol, out }).map(drop),
        Command::Nodice { input, n, out, no_timing } => {
            cmd_nodice(&NodiceOptions { input, cycles: n, out, timing: !no_timing }).map(drop)
        }
        Command::Slln { input, n, seed, radius, out, no_timing } => {
            cmd_slln(&SllnOptions { input, steps: n, seed, radius, out, timing: !no_timing }).map(drop)
        }
        Command::Flow { input, x0, t, flow_tol, steps, tol, out } => {
            cmd_flow(&FlowOptions { input, x0, t, flow_tol, euler_steps: steps, tol, out }).map(drop)
        }
        Command::Verify { dims, instances, seed, flow_tol, tol, out, slack_override } => cmd_verify(&VerifyOptions {
            dims,
            instances,
            seed,
            flow_tol,
            tol,
            slack_override,
            threads: threads_from_env(),
            out,
        })
        .map(drop),
        Command::Generate { dim, n, seed, scale, uniform, out } => {
            cmd_generate(&GenerateOptions { dim, atoms: n, seed, scale, uniform, out }).map(drop)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
