//! Command-line front end for `densitylab`.
//!
//! Every invocation runs one recipe and writes one report, JSON by default.
//! Exit status is 0 when all checks pass, 2 when a check fails and 1 on
//! errors.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod config;
pub mod literals;
mod recipes;

pub use recipes::Outcome;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ANOMALY: i32 = 2;

pub const RECIPES: &[&str] = &[
    "density",
    "chain",
    "hamming",
    "auerbach",
    "salat-example",
    "sharpness",
    "gasull",
    "toeplitz",
    "rajagopal",
    "olivier",
    "abel",
];

fn count(s: &str) -> Result<u64, String> {
    literals::parse_count(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "densitylab",
    version,
    about = "ψ-densities of integer sets and sub-series convergence checks"
)]
pub struct Cli {
    /// key = value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Report destination; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Window {
    #[arg(long, value_parser = count, default_value = "1000000")]
    pub horizon: u64,
    #[arg(long, default_value_t = 0.5)]
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationArg {
    Sum,
    PsiValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    /// Σ_{k≤n, k∈A} c_k
    Subseries,
    /// Σ_{k≤n, k∈A} c_k / Σ_{k≤n} c_k
    Ratio,
    /// (ψ(n)/ψ′(n)) c_n
    Olivier,
    /// A_ψ(n) c_n/ψ′(n)
    Nc1,
    /// ψ(n) c_n
    S1Concave,
    /// (ψ(n)/ψ′(n)) c_n
    S1Convex,
    /// Σ_{k≤n} m_k c_k
    Subsigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimArg {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Linear or ψ-density estimate of a set.
    Density {
        #[arg(long)]
        set: String,
        /// Omit for linear density.
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, value_enum, default_value_t = NormalizationArg::Sum)]
        normalization: NormalizationArg,
        /// Evaluate along the increasing sequence given by this set literal instead of at every n.
        #[arg(long)]
        along: Option<String>,
        #[command(flatten)]
        window: Window,
    },
    /// Ordering of lower/upper linear and ψ-densities.
    Chain {
        #[arg(long)]
        set: String,
        #[arg(long)]
        psi: String,
        #[command(flatten)]
        window: Window,
    },
    /// Membership of ψ in the concave/convex classes.
    ClassifyPsi {
        #[arg(long)]
        psi: String,
        #[arg(long, value_parser = count, default_value = "1000000")]
        horizon: u64,
    },
    /// Order of growth and doubling estimates for ψ.
    Growth {
        #[arg(long)]
        psi: String,
        #[arg(long, value_parser = count, default_value = "1000000")]
        horizon: u64,
    },
    /// Partial-sum and condition traces.
    Trace {
        #[arg(long, value_enum)]
        kind: TraceKind,
        #[arg(long, default_value = "recip")]
        c: String,
        #[arg(long, default_value = "naturals")]
        set: String,
        #[arg(long, default_value = "identity")]
        psi: String,
        #[arg(long, default_value = "alt")]
        signs: String,
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
        exact: bool,
        #[command(flatten)]
        window: Window,
    },
    /// Build a witness and serialize it.
    #[command(subcommand)]
    Construct(Construct),
    /// Build or load inputs and check the corresponding statements.
    #[command(subcommand)]
    Verify(Verify),
    /// Quick seeded battery of identity and construction checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Print catalogs of ψ keys, literals and recipes.
    List,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HammingArgs {
    /// Set literal of the increasing sequence φ.
    #[arg(long, default_value = "squares")]
    pub phi: String,
    #[arg(long, default_value = "identity")]
    pub psi: String,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    #[arg(long, value_parser = count, default_value = "10000000")]
    pub budget: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AuerbachArgs {
    #[arg(long, default_value = "recip")]
    pub c: String,
    #[arg(long, default_value = "identity")]
    pub psi: String,
    #[arg(long, default_value_t = 6)]
    pub kmax: usize,
    #[arg(long, value_parser = count, default_value = "10000000")]
    pub stage_budget: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SalatArgs {
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 10)]
    pub blocks: u32,
    #[arg(long, default_value_t = densitylab::constructions::salat::DEFAULT_BLOCK_CAP)]
    pub cap: u32,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construct {
    Hamming(HammingArgs),
    Auerbach(AuerbachArgs),
    Salat {
        #[command(flatten)]
        salat: SalatArgs,
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
        sharpness: bool,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verify {
    /// Summation-by-parts identities on seeded random instances.
    Abel {
        /// Largest n; each trial draws n uniformly from 2..=n.
        #[arg(long, value_parser = count, default_value = "1000")]
        n: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
        exact: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative tolerance of the floating-point comparison.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Row sums of the summability matrix and the transform of a sequence.
    Toeplitz {
        #[arg(long, default_value = "recip")]
        c: String,
        #[arg(long, default_value = "identity")]
        psi: String,
        /// Rows 1..=n are checked against the closed form.
        #[arg(long, value_parser = count, default_value = "10000")]
        n: u64,
        /// Sequence transformed by the matrix.
        #[arg(long, default_value = "const:1")]
        x: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        window: Window,
    },
    /// Weighted means σ(χ_A, a) and σ(χ_A, b).
    Rajagopal {
        #[arg(long)]
        set: String,
        #[arg(long)]
        a: String,
        #[arg(long, default_value = "const:1")]
        b: String,
        #[arg(long, default_value_t = densitylab::signed::DIVERGENCE_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        window: Window,
    },
    /// (ψ/ψ′) c_n tail bound.
    Olivier {
        #[arg(long)]
        c: String,
        #[arg(long, default_value = "identity")]
        psi: String,
        /// Upper bound for the tail supremum; unchecked when absent.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        window: Window,
    },
    Hamming {
        #[command(flatten)]
        args: HammingArgs,
        #[arg(long, value_parser = count)]
        horizon: Option<u64>,
    },
    Auerbach {
        #[command(flatten)]
        args: AuerbachArgs,
        #[arg(long, value_parser = count, default_value = "10000000")]
        horizon: u64,
    },
    SalatExample(SalatArgs),
    Sharpness {
        #[command(flatten)]
        salat: SalatArgs,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Signed density traces for a sub-signed series.
    Gasull {
        #[arg(long, default_value = "alt")]
        signs: String,
        #[arg(long, default_value = "recip")]
        c: String,
        #[arg(long, default_value = "identity")]
        psi: String,
        #[arg(long, value_enum, default_value_t = ClaimArg::Unknown)]
        claim: ClaimArg,
        #[command(flatten)]
        window: Window,
    },
}

fn override_self(cmd: clap::Command) -> clap::Command {
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let mut cmd = cmd.args_override_self(true);
    for name in names {
        cmd = cmd.mut_subcommand(name, override_self);
    }
    cmd
}

/// Parses arguments, merging a config file when `--config` is given.
pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = config::merge_config(args)
        .map_err(|e| Cli::command().error(clap::error::ErrorKind::InvalidValue, e))?;
    let matches = override_self(Cli::command()).try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Runs one parsed invocation and writes its report.
pub fn execute(cli: &Cli) -> densitylab::Result<Outcome> {
    let outcome = recipes::run_recipe(cli)?;
    let text = outcome.render(cli)?;
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| {
            densitylab::Error::InvalidArgument(format!("output `{}`: {e}", path.display()))
        })?,
        None => print!("{text}"),
    }
    Ok(outcome)
}

/// Full entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) if outcome.anomalies.is_empty() => EXIT_OK,
        Ok(outcome) => {
            for a in &outcome.anomalies {
                eprintln!("anomaly: {a}");
            }
            EXIT_ANOMALY
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
