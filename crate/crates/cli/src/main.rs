mod commands;
mod config;
mod output;
mod svg;

use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gffi",
    version,
    about = "Wall-reflected interlacing particles: simulation, kernel and fluctuation checks"
)]
struct Cli {
    /// JSON configuration file; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving artifacts and the manifest
    #[arg(long, global = true, default_value = "gffi-out")]
    out: PathBuf,
    /// Worker threads (falls back to GFFI_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories from the packed state
    Simulate(commands::SimulateArgs),
    /// Evaluate one kernel entry
    Kernel(commands::KernelArgs),
    /// Triangle identities and far-right limits of the conjugated kernel
    VerifyKernelIdentities(commands::IdentityArgs),
    /// Critical point and local density at a macroscopic point
    Omega(commands::OmegaArgs),
    /// Edges of the liquid region over an (η, τ) grid
    FrozenBoundary(commands::BoundaryArgs),
    /// Green's function between two points
    Green(commands::GreenArgs),
    /// Monte Carlo height moments against the Gaussian free field
    GffVerify(commands::GffArgs),
    /// Direct kernel against its saddle-point estimate
    SaddleCompare(commands::SaddleArgs),
    /// Run the acceptance criteria
    Accept(commands::AcceptArgs),
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { kind: "config", message: message.into(), code: 2 }
    }
    pub fn io(message: impl Into<String>) -> Self {
        CliError { kind: "io", message: message.into(), code: 1 }
    }
}

impl From<gffi_core::Error> for CliError {
    fn from(e: gffi_core::Error) -> Self {
        use gffi_core::Error::*;
        let kind = match e {
            NonConvergence { .. } | ImaginaryResidue { .. } | Singular(_) => "numeric",
            OutOfDomain(_) => "domain",
            InsufficientRuns(_) => "statistics",
            InvalidArgument(_) | WallViolation { .. } | Malformed(_) => "invalid-argument",
        };
        let code = if kind == "invalid-argument" { 2 } else { 1 };
        CliError { kind, message: e.to_string(), code }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": e.kind, "message": e.message } }));
    ExitCode::from(e.code)
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GFFI_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::config(format!("GFFI_THREADS={v} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::config("thread count must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(&CliError::config(e.to_string().trim_end())),
    };
    if let Err(e) = init_threads(cli.threads) {
        return fail(&e);
    }
    let ctx = commands::Context { config: cli.config, out: cli.out };
    let res = match cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Kernel(a) => commands::kernel(&ctx, a),
        Command::VerifyKernelIdentities(a) => commands::identities(&ctx, a),
        Command::Omega(a) => commands::omega(&ctx, a),
        Command::FrozenBoundary(a) => commands::frozen_boundary(&ctx, a),
        Command::Green(a) => commands::green(&ctx, a),
        Command::GffVerify(a) => commands::gff_verify(&ctx, a),
        Command::SaddleCompare(a) => commands::saddle_compare(&ctx, a),
        Command::Accept(a) => commands::accept(&ctx, a),
    };
    match res {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
