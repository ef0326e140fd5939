use std::path::PathBuf;
use std::str::FromStr;

use baltor_core::{eval::Method, probmodel::ModelKind, SelectionMode};
use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "baltor",
    version,
    about = "Bounded-abstention pairwise ranking: train, calibrate, sweep, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic fold (train/vali/test) in LETOR format
    Synth(SynthArgs),
    /// Train the builtin linear ranker (or record an external one) and
    /// estimate the tie parameter
    Train(TrainArgs),
    /// Calibrate selection thresholds on a held-out split for a coverage grid
    Calibrate(CalibrateArgs),
    /// Evaluate calibrated policies (and baselines) on labeled test pairs
    Sweep(SweepArgs),
    /// Verify the optimal-selector construction on random finite worlds
    Oracle(OracleArgs),
}

/// Which scorer produces item scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerSpec {
    Builtin,
    External(PathBuf),
}

impl FromStr for ScorerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "builtin" {
            Ok(ScorerSpec::Builtin)
        } else if let Some(path) = s.strip_prefix("external:") {
            if path.is_empty() {
                Err("external scorer needs a path: external:PATH".into())
            } else {
                Ok(ScorerSpec::External(PathBuf::from(path)))
            }
        } else {
            Err(format!("expected 'builtin' or 'external:PATH', got '{s}'"))
        }
    }
}

impl std::fmt::Display for ScorerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScorerSpec::Builtin => write!(f, "builtin"),
            ScorerSpec::External(p) => write!(f, "external:{}", p.display()),
        }
    }
}

/// Tie parameter: estimated from training pairs or fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaSpec {
    Auto,
    Fixed(f64),
}

impl FromStr for ThetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(ThetaSpec::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected 'auto' or a number >= 1, got '{s}'"))?;
        if v.is_finite() && v >= 1.0 {
            Ok(ThetaSpec::Fixed(v))
        } else {
            Err(format!("fixed theta must be finite and >= 1, got '{s}'"))
        }
    }
}

impl std::fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThetaSpec::Auto => write!(f, "auto"),
            ThetaSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Parse a comma-separated coverage grid and normalise it: values must lie
/// in (0, 1]; duplicates collapse and the result is strictly decreasing.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let mut grid = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let c: f64 = tok
            .parse()
            .map_err(|_| CliError::usage(format!("invalid coverage value '{tok}'")))?;
        if !(c > 0.0 && c <= 1.0) {
            return Err(CliError::usage(format!("coverage {c} outside (0, 1]")));
        }
        grid.push(c);
    }
    if grid.is_empty() {
        return Err(CliError::usage("the coverage grid is empty"));
    }
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    Ok(grid)
}

/// Parse the baseline list, preserving the canonical order.
pub fn parse_baselines(spec: &str) -> Result<Vec<Method>, CliError> {
    let mut requested = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let method: Method = tok
            .parse()
            .map_err(|e: baltor_core::Error| CliError::usage(e.to_string()))?;
        if !requested.contains(&method) {
            requested.push(method);
        }
    }
    if requested.is_empty() {
        return Err(CliError::usage("the baseline list is empty"));
    }
    let canonical = [Method::Balto, Method::Entropy, Method::Random];
    Ok(canonical
        .into_iter()
        .filter(|m| requested.contains(m))
        .collect())
}

pub const DEFAULT_GRID: &str = "0.99,0.95,0.90,0.85,0.80,0.75,0.70";

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory for train.txt, vali.txt, test.txt and truth.txt
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub train_queries: usize,
    #[arg(long, default_value_t = 60)]
    pub cal_queries: usize,
    #[arg(long, default_value_t = 60)]
    pub test_queries: usize,
    /// Items per query
    #[arg(long, default_value_t = 20)]
    pub items: usize,
    /// Feature dimension
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Number of relevance grades (>= 2); more grades mean fewer ties
    #[arg(long, default_value_t = 3)]
    pub grades: u32,
    /// Latent noise standard deviation (signal has unit deviation)
    #[arg(long, default_value_t = 0.4)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training file, or a fold directory containing train.txt
    #[arg(long)]
    pub data: PathBuf,
    /// 'builtin' or 'external:PATH' (PATH holds train-split scores, needed
    /// only with --standardize)
    #[arg(long, default_value = "builtin")]
    pub scorer: ScorerSpec,
    /// 'auto' (estimate from training pairs) or a fixed value >= 1
    #[arg(long, default_value = "auto")]
    pub theta: ThetaSpec,
    /// Standardise scores to zero mean / unit variance over training items
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 40)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Model file to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Calibration file (labels optional), or a fold directory containing
    /// vali.txt
    #[arg(long)]
    pub data: PathBuf,
    /// Model file written by `train`
    #[arg(long)]
    pub ranker: PathBuf,
    /// Probability model converting scores to outcome probabilities
    #[arg(long, default_value = "bt")]
    pub model: ModelKind,
    /// Calibration-split scores when the ranker is external
    #[arg(long)]
    pub scorer: Option<ScorerSpec>,
    #[arg(long, default_value = DEFAULT_GRID)]
    pub grid: String,
    /// det: accept values <= threshold; rand: randomise at the boundary
    #[arg(long, default_value = "det")]
    pub mode: SelectionMode,
    /// Methods to calibrate (random needs no calibration and is skipped)
    #[arg(long, default_value = "balto,entropy")]
    pub baselines: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Policies file to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Labeled test file, a fold directory, or a directory of Fold*/
    /// subdirectories
    #[arg(long)]
    pub data: PathBuf,
    /// Model file (single-fold mode; omit to run the full per-fold pipeline)
    #[arg(long)]
    pub ranker: Option<PathBuf>,
    /// Policies file (single-fold mode)
    #[arg(long)]
    pub policies: Option<PathBuf>,
    /// Probability model; defaults to the one recorded in the policies file
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Scores for the test split (or a directory mirroring the fold layout
    /// in pipeline mode) when the ranker is external
    #[arg(long)]
    pub scorer: Option<ScorerSpec>,
    /// Coverage grid; defaults to the policies' grid when evaluating
    /// artifacts, or to the standard grid in pipeline mode
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value = "det")]
    pub mode: SelectionMode,
    #[arg(long, default_value = "balto,entropy,random")]
    pub baselines: String,
    /// Tie parameter for pipeline mode
    #[arg(long, default_value = "auto")]
    pub theta: ThetaSpec,
    /// Standardise scores (pipeline mode)
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 40)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report CSV path; a .json mirror is written next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 200)]
    pub worlds: usize,
    /// States per world (exhaustive search is bounded at 4)
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    /// Grid resolution K of the exhaustive search
    #[arg(long, default_value_t = 40)]
    pub grid_k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "0.3,0.5,0.7,0.9,1.0")]
    pub coverages: String,
    /// Loss family: zero-one, random-symmetric, or both (alternating)
    #[arg(long, default_value = "both")]
    pub loss: String,
    /// Report CSV path (stdout summary is always printed)
    #[arg(long)]
    pub out: Option<PathBuf>,
}
