//! `fastmm` — command-line front end of the fastmm library.
//!
//! Every subcommand prints a human-readable report on stdout (CSV where
//! requested).  Exit status: `0` on success, `1` when a check fails
//! (invalid scheme, bound violation, failed verification), `2` on usage
//! errors (unknown flags, unreadable or malformed input).  Randomized
//! commands require an explicit `--seed`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fastmm::{Dist, NormId, SchemeId};

/// Analyze, optimize and execute fast matrix-multiplication schemes.
#[derive(Parser, Debug)]
#[command(name = "fastmm", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Selects a scheme: a bundled name, or three SMS files.
#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Bundled scheme name (see `catalog`) or `external:L.sms,R.sms,P.sms`.
    #[arg(long, conflicts_with = "input")]
    pub scheme: Option<SchemeId>,
    /// Three SMS files holding `L`, `R` and `P`.
    #[arg(long, num_args = 3, value_names = ["L", "R", "P"])]
    pub input: Option<Vec<PathBuf>>,
}

/// Straight-line program synthesis strategy.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Common-subexpression elimination on the matrix.
    Direct,
    /// Kernel decomposition.
    Kernel,
    /// Transpose of the kernel decomposition of the transposed matrix.
    Transpose,
    /// Cheapest of all strategies.
    Best,
}

/// Output of `optimize`.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    /// The program in the line-oriented text format.
    TextSlp,
    /// Naive and optimized operation counts as CSV.
    CsvCounts,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a scheme computes a matrix product (exactly when its
    /// coefficients are exact).
    Validate {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Growth factors γ_{p,q} (one value when both --p and --q are given).
    Gamma {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Output norm: 1, 2 or inf.
        #[arg(long)]
        p: Option<NormId>,
        /// Input norm: 1, 2 or inf.
        #[arg(long)]
        q: Option<NormId>,
        /// CSV instead of aligned text.
        #[arg(long)]
        csv: bool,
    },
    /// Forward-error bound constants for the four (p, q) ∈ {2, ∞}² pairs.
    Bounds {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Recursion depth ℓ used for the E⁽ℓ⁾ column.
        #[arg(long, default_value_t = 1)]
        levels: u32,
        /// Base-case inner dimension k₀.
        #[arg(long, default_value_t = 1)]
        k0: usize,
        /// CSV instead of aligned text.
        #[arg(long)]
        csv: bool,
    },
    /// Minimize γ₂ over the isotropy orbit of a scheme.
    Orbit {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Number of descent restarts.
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Objective evaluations per restart.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        /// Seed of the restart perturbations.
        #[arg(long)]
        seed: u64,
        /// Snap parameters to nearby simple algebraic values.
        #[arg(long)]
        snap: bool,
        /// Snapping tolerance.
        #[arg(long, default_value_t = 1e-4)]
        snap_tol: f64,
        /// Print the transformed L, R, P as SMS with decimals.
        #[arg(long)]
        emit_sms: bool,
    },
    /// Synthesize a straight-line program for a matrix (or for L, R, P of
    /// a scheme).
    Optimize {
        /// SMS file holding one matrix.
        #[arg(long, conflicts_with = "scheme")]
        input: Option<PathBuf>,
        /// Optimize the three matrices of this scheme instead.
        #[arg(long)]
        scheme: Option<SchemeId>,
        /// Strategy.
        #[arg(long, value_enum, default_value_t = Mode::Best)]
        mode: Mode,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Emit::TextSlp)]
        emit: Emit,
        /// Pipeline runs explored when colinear pairs tie.
        #[arg(long)]
        branch_budget: Option<usize>,
    },
    /// Tellegen-transpose a straight-line program in the text format.
    Transpose {
        /// Program file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Factor a scheme into changes of basis and a sparse core.
    Sparsify {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Largest number of row subsets enumerated per matrix.
        #[arg(long)]
        max_subsets: Option<usize>,
    },
    /// Multiply random matrices and report the error against an
    /// extended-precision reference together with the predicted bound.
    Mm {
        /// Scheme applied at every level.
        #[arg(long, conflicts_with = "schedule")]
        scheme: Option<SchemeId>,
        /// Schemes cycled level by level, separated by `>` or `,`.
        #[arg(long)]
        schedule: Option<String>,
        /// Recursion depth (default: as deep as 16×16 base blocks allow).
        #[arg(long)]
        levels: Option<usize>,
        /// `N` or `MxKxN`.
        #[arg(long)]
        size: String,
        /// uniform, normal or randsvd:<cond>.
        #[arg(long, default_value = "uniform")]
        dist: Dist,
        /// Input seed.
        #[arg(long)]
        seed: u64,
        /// Run through the alternative basis.
        #[arg(long)]
        altbasis: bool,
        /// Smallest base-case dimension when --levels is not given.
        #[arg(long, default_value_t = 16)]
        min_base: usize,
    },
    /// Accuracy benchmark; writes one CSV file.
    Bench {
        /// Plans: `classical`, a scheme name, `altbasis:<scheme>` or
        /// `mixed:<s1>><s2>…` (default: the 2×2×2 family).
        #[arg(long, value_delimiter = ',')]
        plans: Vec<String>,
        /// Sizes `N` or `MxKxN`.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
        sizes: Vec<String>,
        /// Distributions.
        #[arg(long, value_delimiter = ',', default_value = "uniform,normal")]
        dists: Vec<Dist>,
        /// Trials per size and distribution.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Base seed.
        #[arg(long)]
        seed: u64,
        /// Smallest base-case dimension.
        #[arg(long, default_value_t = 16)]
        min_base: usize,
        /// Fixed recursion depth.
        #[arg(long)]
        levels: Option<usize>,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled schemes.
    Catalog,
}

/// How a command ended.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Success.
    Ok,
    /// A check failed; the message has already been printed.
    CheckFailed,
}

/// Error of a command, mapped to an exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 2.
    Usage(String),
    /// A failed check raised as an error: exit 1.
    Check(String),
}

impl From<fastmm::Error> for CliError {
    fn from(e: fastmm::Error) -> Self {
        match e {
            fastmm::Error::NonConforming(_) | fastmm::Error::Singular(_) => CliError::Check(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code.clamp(0, 255) as u8);
        }
    };
    match commands::run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(CliError::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
