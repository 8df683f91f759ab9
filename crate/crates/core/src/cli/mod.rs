//! Command-line front end.

mod commands;
pub mod data;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::evaluation::Alternative;
use crate::inventory::{DatasetId, TheoryId};
use crate::method::Method;
use crate::svg::Overlay;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOLVER: i32 = 70;

/// A command failure and its exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Data(String),
    Solver(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Solver(_) | Failure::Internal(_) => EXIT_SOLVER,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Solver(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() {
            return Failure::Solver(e.to_string());
        }
        match e {
            Error::InvalidConfig(_) | Error::InvalidSmoothing(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Debug, Parser)]
#[command(name = "confmetric", version, about = "Learn and evaluate quadratic phoneme metrics from confusion data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shepard similarities and distances from a confusion matrix.
    Distances(DistancesArgs),
    /// Fit one method on all pairs.
    Fit(FitArgs),
    /// Leave-one-phoneme-out evaluation of one or more methods.
    Evaluate(EvaluateArgs),
    /// Leave-one-feature-out ablation with diagonal LS.
    Ablate(AnalysisArgs),
    /// Per-feature diagonal LS weights across folds.
    Saliency(AnalysisArgs),
    /// Classical MDS embedding with an SVG scatter.
    Mds(MdsArgs),
    /// Normalized saliency of two datasets against each other.
    CompareLanguages(CompareArgs),
    /// Rank comparison of minimal-pair distances across datasets.
    MinimalPairs(MinimalPairsArgs),
    /// Print the default solver configuration as JSON.
    Defaults,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for outputs and the run manifest.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads for folds and grid points (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Confusion CSV path or `bundled:hebrew`.
    #[arg(long, value_name = "SOURCE", required_unless_present = "distances", conflicts_with = "distances")]
    pub confusion: Option<String>,
    /// Square distance CSV.
    #[arg(long, value_name = "CSV")]
    pub distances: Option<PathBuf>,
    /// Pseudo-count added to every confusion cell.
    #[arg(long, default_value_t = 0.0, value_parser = parse_smoothing, allow_hyphen_values = true)]
    pub smoothing: f64,
    /// Dataset name used in reports.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long, value_parser = parse_theory)]
    pub theory: TheoryId,
    /// Keep only phonemes marked for this dataset.
    #[arg(long, value_parser = parse_dataset)]
    pub dataset: Option<DatasetId>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Solver configuration JSON; flags override its fields.
    #[arg(long, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Fixed L1 weight (LS methods); selected by nested leave-one-phoneme-out when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// OASIS aggressiveness C.
    #[arg(long)]
    pub aggressiveness: Option<f64>,
    /// OASIS updates.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Coordinate-descent step tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Coordinate-descent sweep limit.
    #[arg(long)]
    pub max_sweeps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DistancesArgs {
    /// Confusion CSV path or `bundled:hebrew`.
    #[arg(long, value_name = "SOURCE")]
    pub confusion: String,
    #[arg(long, default_value_t = 0.0, value_parser = parse_smoothing, allow_hyphen_values = true)]
    pub smoothing: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    #[command(flatten)]
    pub theory: TheoryArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Repeat to evaluate several methods.
    #[arg(long, value_parser = parse_method, required = true)]
    pub method: Vec<Method>,
    #[command(flatten)]
    pub theory: TheoryArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub theory: TheoryArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MdsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Outline a phoneme class; repeatable.
    #[arg(long, value_parser = parse_overlay)]
    pub overlay: Vec<Overlay>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub theory: TheoryArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Second dataset as `name=SOURCE` (confusion CSV, `bundled:<id>` or `distances:<csv>`).
    #[arg(long, value_parser = parse_named_source)]
    pub other: (String, String),
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MinimalPairsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Further datasets as `name=SOURCE`; repeatable.
    #[arg(long, value_parser = parse_named_source, required = true)]
    pub other: Vec<(String, String)>,
    /// Phoneme pair `a-b`; repeatable. Defaults to the five voicing pairs.
    #[arg(long, value_parser = parse_pair)]
    pub pair: Vec<(String, String)>,
    #[arg(long, default_value = "two-sided", value_parser = parse_alternative)]
    pub alternative: Alternative,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_smoothing(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(format!("smoothing must be finite and >= 0, got {s}"));
    }
    Ok(v)
}

fn parse_theory(s: &str) -> Result<TheoryId, String> {
    s.parse().map_err(|_| format!("unknown theory '{s}' (expected articulatory or phonological)"))
}

fn parse_dataset(s: &str) -> Result<DatasetId, String> {
    s.parse().map_err(|_| format!("unknown dataset '{s}' (expected nm, luce or hebrew)"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.as_str()).collect();
        format!("unknown method '{s}' (expected one of {})", names.join(", "))
    })
}

fn parse_overlay(s: &str) -> Result<Overlay, String> {
    s.parse()
}

fn parse_named_source(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((name, source)) if !name.is_empty() && !source.is_empty() => Ok((name.to_string(), source.to_string())),
        _ => Err(format!("expected name=SOURCE, got '{s}'")),
    }
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('-') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && a != b => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("expected two distinct labels as a-b, got '{s}'")),
    }
}

fn parse_alternative(s: &str) -> Result<Alternative, String> {
    match s {
        "two-sided" => Ok(Alternative::TwoSided),
        "greater" => Ok(Alternative::Greater),
        "less" => Ok(Alternative::Less),
        _ => Err(format!("unknown alternative '{s}' (expected two-sided, greater or less)")),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match commands::dispatch(cli.command, recorded) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}
