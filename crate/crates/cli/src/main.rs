//! `lacmgf`: moment generating functions of lacunary trigonometric sums.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a grid or
//! enumeration limit makes the request infeasible, 64 for an unknown
//! subcommand. Results do not depend on `--threads`.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_UNKNOWN_COMMAND: u8 = 64;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }
}

impl From<lacmgf_core::Error> for CliError {
    fn from(e: lacmgf_core::Error) -> Self {
        let message = e.to_string();
        if e.is_infeasible() {
            CliError::infeasible(message)
        } else {
            CliError::usage(message)
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "lacmgf",
    version,
    about = "Moment generating functions of lacunary trigonometric sums"
)]
#[command(subcommand_required = true, arg_required_else_help = true)]
pub struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SeqArgs {
    /// Generator: geometric:a:N, pairblock:N, tripleblock:N or list:n1,n2,...
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: Option<String>,
    /// File with one term per line; `#` starts a comment line.
    #[arg(long, value_name = "PATH")]
    pub seq: Option<PathBuf>,
    /// Use only the first N terms.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    /// Quadrature when the grid fits, the Diophantine expansion otherwise.
    Auto,
    Quad,
    Dio,
    /// Both methods, one record each (mgf only).
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodChoice,
    /// Quadrature grid points per unit of bandwidth (at least 4).
    #[arg(long)]
    pub oversample: Option<u32>,
    /// Largest Bessel order in the Diophantine expansion; chosen automatically when absent.
    #[arg(long)]
    pub m_max: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct LambdaArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Grid a:b:step, both ends included.
    #[arg(long, allow_hyphen_values = true, value_name = "A:B:STEP")]
    pub lambda_grid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct TArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_name = "A:B:STEP")]
    pub t_grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockChoice {
    Pair,
    Triple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindChoice {
    #[value(alias = "two_term")]
    TwoTerm,
    #[value(alias = "three_term")]
    ThreeTerm,
    #[value(alias = "four_term_ppmm")]
    FourTermPpmm,
    #[value(alias = "four_term_pppm")]
    FourTermPppm,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a sequence and its certified gap ratio.
    Seq {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate MGF_N(λ).
    Mgf {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Choose s and L and decompose {1..N} into long and short blocks.
    Blocks {
        /// Sequence length N (defaults to the sequence length).
        #[arg(long)]
        n: Option<usize>,
        /// Gap ratio q as an integer, fraction or decimal.
        #[arg(long)]
        q: Option<String>,
        #[arg(long = "gen", value_name = "SPEC")]
        generator: Option<String>,
        #[arg(long, value_name = "PATH")]
        seq: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Count near-solutions of a frequency equation inside blocks.
    Count {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_enum)]
        kind: KindChoice,
        /// Explicit block first:last (1-based, inclusive).
        #[arg(long, value_name = "FIRST:LAST")]
        block: Option<String>,
        /// Threshold for --block (defaults to the block's first term).
        #[arg(long)]
        threshold: Option<String>,
        /// Long block length; counts every long block with s from the gap ratio.
        #[arg(long = "l")]
        l: Option<usize>,
        /// Keep the diagonal in two-term counts.
        #[arg(long)]
        include_diagonal: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Largest long-block count as L grows.
    Probe {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_enum)]
        kind: KindChoice,
        /// Comma-separated long block lengths.
        #[arg(long = "l-values", value_delimiter = ',', required = true)]
        l_values: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact Taylor coefficients of log I0(√2 λ).
    BesselCoeffs {
        /// Highest power of λ: 2, 4, 6 or 8.
        #[arg(long)]
        order: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit Λ_N(λ) with λ², λ³, λ⁴ and higher nuisance terms.
    Fit {
        #[command(flatten)]
        seq: SeqArgs,
        /// Fit the isolated-block limit instead of a sequence.
        #[arg(long, value_enum)]
        block: Option<BlockChoice>,
        /// Grid a:b:step; the point 0 is dropped. Defaults to ±0.05..±0.25.
        #[arg(long, allow_hyphen_values = true, value_name = "A:B:STEP")]
        lambda_grid: Option<String>,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// max |Λ_N(λ) - λ²/2| / |λ|³ over a grid.
    Envelope {
        #[command(flatten)]
        seq: SeqArgs,
        /// Grid a:b:step; the point 0 is dropped. Defaults to ±0.05..±0.25.
        #[arg(long, allow_hyphen_values = true, value_name = "A:B:STEP")]
        lambda_grid: Option<String>,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Legendre transform of sampled Λ_N.
    Rate {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_enum)]
        block: Option<BlockChoice>,
        /// Use Λ(λ) = λ²/2 instead of a sequence.
        #[arg(long)]
        gaussian: bool,
        /// Sampling grid for Λ. Defaults to -1:1:0.01.
        #[arg(long, allow_hyphen_values = true, value_name = "A:B:STEP")]
        lambda_grid: Option<String>,
        #[command(flatten)]
        t: TArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Measure of {x : (λ/√N) Σ √2 cos(2π n_k x) >= t} on an equispaced grid.
    Tail {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        lambda_scale: f64,
        #[command(flatten)]
        t: TArgs,
        /// Number of sample points (default: smallest power of two >= 10 n_N).
        #[arg(long)]
        grid_points: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                ErrorKind::InvalidSubcommand => {
                    let _ = e.print();
                    ExitCode::from(EXIT_UNKNOWN_COMMAND)
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    ExitCode::from(EXIT_USAGE)
                }
                _ => {
                    let text = e.to_string();
                    eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message.replace('\n', " "));
            ExitCode::from(e.code)
        }
    }
}
