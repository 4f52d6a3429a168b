//! Command line tying the pipeline together: sharp beta constants,
//! admissibility reports, membership certificates, pinned reference values,
//! and parameter sweeps.
//!
//! Exit codes are a stable contract: 0 success / all conditions pass,
//! 1 some condition failed, 2 input error, 3 numeric failure.

mod commands;
mod config;
mod render;
mod reproduce;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use crate::config::{CliError, RunConfig};
use crate::render::Format;

#[derive(Parser)]
#[command(
    name = "pascu",
    version,
    about = "Sharp beta constants and Pascu-class certificates for weighted integral transforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the sharp beta for one kernel and parameter set.
    ///
    /// Prints X, beta, the quadrature error estimate, a moment-series
    /// cross-check, and the rho-blended beta when rho is nonzero.
    Beta(CommonArgs),
    /// Run every admissibility condition; one row per condition with
    /// verdict, margin, and witness. Exits 0 iff nothing failed.
    Admissible(CommonArgs),
    /// Build the extremal at the sharp (or given) beta, apply the
    /// transform, and certify membership on a disk grid plus the duality
    /// functional.
    Verify(VerifyArgs),
    /// Recompute the pinned reference values and compare each against its
    /// expectation and tolerance. Exits 0 iff every row matches.
    Reproduce(OutputArgs),
    /// Sweep one or two parameters over ranges, one CSV row per grid point.
    #[command(after_help = "\
Columns: one per swept parameter, then
  x          solved integral value X
  beta       sharp beta at the point
  range_closed_form, final_cond, additional_cond, initial_cond,
  monotone_decreasing, n_pi_nonneg
             admissibility verdicts (pass / fail / not_applicable)
  min_re     membership grid minimum of the transformed extremal
The first line is the schema comment `# schema=1`, the second the header.")]
    Sweep(SweepArgs),
}

/// Flags shared by the computing subcommands. Every value can also come
/// from a --config file (flat key=value lines, section-prefixed keys like
/// `kernel.c=0` or `spec.alpha=3`); flags win over file entries.
#[derive(Args)]
struct CommonArgs {
    /// Kernel as family:key=value,... Families: bernardi:c=0,
    /// ab:a=-0.5,b=3, komatu:c=-0.5,p=3, hypergeom:a=0,b=0.5,c=3,
    /// tabulated:file=SAMPLES (two columns t lambda per line).
    #[arg(long)]
    kernel: Option<String>,
    /// First parameter of the function family (alpha >= 0).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Second parameter of the function family (gamma >= 0).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Class blend: 0 starlike, 1 convex, in between mixed. Default 0.
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// Pre-mixing weight of the generalized transform; 0 (default) is the
    /// plain transform. Must be < 1.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Which root of the resolving quadratic is mu.
    #[arg(long, value_enum)]
    mu_assignment: Option<MuArg>,
    /// Truncation order for power series work (default 400).
    #[arg(long)]
    order: Option<usize>,
    /// Outer radius of the membership grid (default 0.95).
    #[arg(long, allow_negative_numbers = true)]
    radius: Option<f64>,
    /// Output format; default text (sweep defaults to csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Build the extremal at this beta instead of the solved sharp value;
    /// the report then includes the sharpness margin against the solved one.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Swept parameter as NAME=LO:HI:STEP; repeat for a second axis (at
    /// most two). NAME is a kernel parameter (c, p, a, b) or one of
    /// alpha, gamma, xi, rho.
    #[arg(long = "sweep")]
    sweeps: Vec<String>,
}

/// Reproduce needs no kernel/parameter input.
#[derive(Args)]
struct OutputArgs {
    /// Output format; default text.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum MuArg {
    /// mu is the larger root.
    Max,
    /// mu is pinned to 1 on the alpha = 1 + 2*gamma family.
    UnitRoot,
}

impl From<MuArg> for pascu_core::MuAssignment {
    fn from(a: MuArg) -> Self {
        match a {
            MuArg::Max => pascu_core::MuAssignment::Max,
            MuArg::UnitRoot => pascu_core::MuAssignment::UnitRoot,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Beta(args) => RunConfig::from_args(&args, Format::Text)
            .and_then(|cfg| commands::cmd_beta(&cfg)),
        Command::Admissible(args) => RunConfig::from_args(&args, Format::Text)
            .and_then(|cfg| commands::cmd_admissible(&cfg)),
        Command::Verify(args) => RunConfig::from_args(&args.common, Format::Text)
            .and_then(|cfg| commands::cmd_verify(&cfg, args.beta)),
        Command::Reproduce(args) => reproduce::cmd_reproduce(
            args.format.unwrap_or(Format::Text),
            args.out.as_deref(),
        ),
        Command::Sweep(args) => RunConfig::from_args(&args.common, Format::Csv)
            .and_then(|cfg| commands::cmd_sweep(&cfg, &args.sweeps)),
    };
    let code = match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    };
    std::process::exit(code);
}
