//! `chanorder`: decide degradability between channels, evaluate guessing and
//! min-entropy measures, and sample the weaker orderings.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<chanorder::Error> for CliError {
    fn from(e: chanorder::Error) -> Self {
        match e {
            chanorder::Error::Numerical(_) | chanorder::Error::Conic(_) => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub const EXIT_DEGRADABLE: u8 = 0;
pub const EXIT_NOT_DEGRADABLE: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_INCONCLUSIVE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chanorder", version, about = "Degradability and related orderings of noisy channels")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print the JSON report instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file (a directory for `random-pair`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether SECOND is a degraded version of FIRST.
    CheckDegradable {
        first: PathBuf,
        second: PathBuf,
        /// Feasibility tolerance on the composition residual.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Evaluate an information measure.
    Measure {
        #[command(subcommand)]
        measure: Measure,
    },
    /// Sample an ordering between FIRST and SECOND and report violations.
    Sample {
        ordering: Ordering,
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Generate a random channel pair.
    RandomPair(RandomPairArgs),
    /// Search for non-degradable classical pairs with no sampled noisiness violation.
    KmSearch {
        #[arg(long, default_value_t = 3)]
        nx: usize,
        #[arg(long, default_value_t = 3)]
        ny: usize,
        #[arg(long, default_value_t = 3)]
        nz: usize,
        /// Number of random pairs examined.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Noisiness trials per non-degradable pair.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Draw only pairs that are degradable by construction.
        #[arg(long)]
        degradable_only: bool,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
        /// Fault injection: run verdicts at a corrupted solver tolerance.
        #[arg(long, hide = true)]
        corrupt_solver_tol: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Measure {
    /// Guessing probability of a joint, or of an ensemble sent through a channel.
    Pguess { input: PathBuf, channel: Option<PathBuf> },
    /// Conditional min-entropy H_min(A|B) of a state (or the cq state of a joint).
    Hmin { input: PathBuf },
    /// Maximal singlet fraction times d_A, with the optimal decoder.
    Qcorr { input: PathBuf },
    /// Conditional Shannon entropy H(U|Y) of a joint.
    Centropy { input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Ordering {
    Ambiguity,
    Coherence,
    Noisiness,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Classical,
    Quantum,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["degradable", "free"])))]
struct RandomPairArgs {
    /// Emit (N, Ψ∘N).
    #[arg(long)]
    degradable: bool,
    /// Emit two independent channels.
    #[arg(long)]
    free: bool,
    #[arg(long, value_enum, default_value_t = Kind::Quantum)]
    kind: Kind,
    #[arg(long, default_value_t = 2)]
    d_in: usize,
    #[arg(long, default_value_t = 2)]
    d_out: usize,
    /// Output dimension of the second channel.
    #[arg(long, default_value_t = 2)]
    d_out2: usize,
    #[arg(long)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are input errors; help and version requests are not.
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
