//! `qfp`: command-line driver for fingerprinting experiments.
//!
//! Every command reads and writes JSON documents and is deterministic given
//! `--seed`. Exit status: 0 on success, 1 for unreadable or malformed input,
//! 2 when well-formed input fails a mathematical precondition.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfp_core::{Error, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "qfp", version, about = "Quantum fingerprinting: margins, embeddings, swap-test simulation")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Margin upper bounds, an optional heuristic witness, and derived lower bounds.
    Margin(MarginArgs),
    /// Run a fingerprinting protocol on every input pair and tabulate errors.
    Simulate(SimulateArgs),
    /// Compile a classical protocol into a vector system or fingerprint states.
    Compile(CompileArgs),
    /// Project the vectors of an embedding or realization and measure distortion.
    Project(ProjectArgs),
    /// Check an embedding or realization against a sign matrix.
    Verify(VerifyArgs),
    /// Write a builtin object as a document.
    Emit(EmitArgs),
    /// Thresholds and margin of the Hamming-distance parity sketch.
    Ham(HamArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    Eq,
    Ip,
    Ham,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Sign matrix document.
    #[arg(long, conflicts_with = "builtin")]
    matrix: Option<PathBuf>,
    /// Builtin problem instead of a matrix file.
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Input bits for `eq` and `ham`.
    #[arg(long)]
    n: Option<u32>,
    /// Input bits for `ip`.
    #[arg(long)]
    k: Option<u32>,
    /// Distance threshold for `ham`.
    #[arg(long)]
    d: Option<u32>,
}

#[derive(Debug, Args)]
struct MarginArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Search for a realization with large margin.
    #[arg(long)]
    heuristic: bool,
    /// Dimension of the heuristic search (default: rows + 1).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Skip the spectral bounds; required for promise matrices.
    #[arg(long)]
    no_bounds: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Embedding, realization or protocol document. Defaults to the parity-EQ states for `--builtin eq`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Target error per input pair; accepts fractions such as `1/3`.
    #[arg(long, default_value = "1/3", value_parser = parse_real)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
}

#[derive(Debug, Args)]
struct CompileArgs {
    /// SMP or one-way protocol document. Defaults to the parity-EQ protocol for `--builtin eq`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Use 32·n sampled random strings for the builtin parity protocol.
    #[arg(long)]
    sampled: bool,
    /// Compile through the one-way form of an SMP protocol.
    #[arg(long)]
    one_way: bool,
    /// Assemble unit fingerprint states (threshold embedding).
    #[arg(long)]
    assemble: bool,
    /// Reduce the assembled states by random projection; implies `--assemble`.
    #[arg(long)]
    reduce: bool,
    /// Projection target for `--reduce` (default: the Johnson–Lindenstrauss dimension).
    #[arg(long)]
    target_dim: Option<usize>,
    /// Worst-case thresholds for a protocol with this error instead of the exact extremes.
    #[arg(long, value_parser = parse_real)]
    theorem_eps: Option<f64>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Embedding or realization document.
    #[arg(long)]
    input: PathBuf,
    /// Target dimension (default: Johnson–Lindenstrauss dimension for `--eps`).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value = "0.2", value_parser = parse_real)]
    eps: f64,
    /// Pass vectors through unchanged.
    #[arg(long, conflicts_with = "dim")]
    identity: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Embedding or realization document.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    matrix: MatrixArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitKind {
    Matrix,
    Protocol,
    Embedding,
    Realization,
}

#[derive(Debug, Args)]
struct EmitArgs {
    #[arg(value_enum)]
    what: EmitKind,
    #[command(flatten)]
    matrix: MatrixArgs,
}

#[derive(Debug, Args)]
struct HamArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    d: u32,
    /// Build the states over every shared string and read thresholds off them.
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Build the states over this many sampled strings.
    #[arg(long)]
    samples: Option<usize>,
}

fn parse_real(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.class() {
            ErrorClass::Input => Failure::input(e.to_string()),
            ErrorClass::Precondition => Failure::precondition(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command_line = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match commands::run(&cli, command_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qfp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
