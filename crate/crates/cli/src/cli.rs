// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use segscan_core::{Admission, Algorithm, RefineRange, StatKind};

#[derive(Debug, Parser)]
#[command(
    name = "segscan",
    version,
    about = "Change-point detection with local two-window statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a single sequence.
    Segment(SegmentArgs),
    /// Segment a panel of aligned sequences with a pooled statistic.
    Multiseg(MultisegArgs),
    /// Monte Carlo benchmark on a built-in scenario.
    Simulate(SimulateArgs),
    /// Calibrate a threshold and write it as JSON.
    Calibrate(CalibrateArgs),
    /// Two-channel allele-specific segmentation.
    Ascn(AscnArgs),
}

/// Threshold family, or a calibration file written by `segscan calibrate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdArg {
    Multiscale,
    Constant,
    Theorem2,
    Calibrated(PathBuf),
}

impl FromStr for ThresholdArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "multiscale" => Ok(Self::Multiscale),
            "constant" => Ok(Self::Constant),
            "theorem2" => Ok(Self::Theorem2),
            _ => match s.strip_prefix("calibrated:") {
                Some(path) if !path.is_empty() => Ok(Self::Calibrated(path.into())),
                _ => Err(format!(
                    "expected multiscale, constant, theorem2 or calibrated:<file>, got '{s}'"
                )),
            },
        }
    }
}

impl fmt::Display for ThresholdArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Multiscale => f.write_str("multiscale"),
            Self::Constant => f.write_str("constant"),
            Self::Theorem2 => f.write_str("theorem2"),
            Self::Calibrated(p) => write!(f, "calibrated:{}", p.display()),
        }
    }
}

/// Options shared by every detection run.
#[derive(Clone, Debug, Args, Serialize)]
pub struct DetectArgs {
    /// Segmentation algorithm.
    #[arg(long, default_value = "local")]
    pub algo: Algorithm,
    /// Threshold family or calibration file.
    #[arg(long, default_value = "constant")]
    pub threshold: ThresholdArg,
    /// Additive constant for multiscale or constant thresholds. Without it
    /// the constant is calibrated on Gaussian null data at --alpha.
    #[arg(long)]
    pub c: Option<f64>,
    /// Slope of the `a log T` threshold.
    #[arg(long)]
    pub a: Option<f64>,
    /// Global false detection probability for calibration.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Replicates for threshold calibration.
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Calibrate by permuting each input sequence instead of simulating.
    #[arg(long)]
    pub permute: bool,
    /// Window grid ratio.
    #[arg(long, default_value_t = 1.2)]
    pub r: f64,
    /// Largest allowed ratio of the two window lengths.
    #[arg(long, default_value_t = 10.0)]
    pub h: f64,
    /// Admission rule for local segmentation.
    #[arg(long, default_value = "interval")]
    pub admission: Admission,
    /// Report raw change-points only.
    #[arg(long)]
    pub no_refine: bool,
    /// Relocation range used by refinement.
    #[arg(long, default_value = "wide")]
    pub refine_range: RefineRange,
    /// Known noise standard deviation; by default each sequence is scaled
    /// by its difference-based estimate.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OutputArgs {
    /// JSON output path; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write a flat CSV table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct InputArgs {
    /// Delimited file, one row per sequence.
    pub input: PathBuf,
    /// Treat the first row as location labels even if it is numeric.
    #[arg(long)]
    pub header: bool,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub detect: DetectArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct MultisegArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Pooled statistic.
    #[arg(long, default_value = "hc")]
    pub stat: StatKind,
    /// Sequences listed per change-point, by largest |z|.
    #[arg(long, default_value_t = 3)]
    pub top_contributors: usize,
    /// Length of the reported reverse-mode ranking.
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[command(flatten)]
    pub detect: DetectArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Built-in scenario.
    #[arg(long, default_value = "example1")]
    pub scenario: String,
    /// Benchmark replicates.
    #[arg(long, default_value_t = 1000)]
    pub bench_reps: usize,
    #[command(flatten)]
    pub detect: DetectArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Sequence length; taken from --input when given.
    #[arg(long)]
    pub len: Option<usize>,
    /// Number of sequences; taken from --input when given.
    #[arg(long, default_value_t = 1)]
    pub n_seq: usize,
    /// Observed panel, required with --permute.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "single")]
    pub stat: StatKind,
    #[command(flatten)]
    pub detect: DetectArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AscnArgs {
    /// Total-intensity channel, one row per individual.
    #[arg(long)]
    pub y: PathBuf,
    /// Allelic channel, same shape as --y.
    #[arg(long)]
    pub z: PathBuf,
    /// Pooling across individuals.
    #[arg(long, default_value = "bj")]
    pub stat: StatKind,
    /// Relative variance change that ends the refit rounds.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub max_rounds: usize,
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub detect: DetectArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl DetectArgs {
    pub fn refine(&self) -> Option<RefineRange> {
        (!self.no_refine).then_some(self.refine_range)
    }

    pub fn is_reverse(&self) -> bool {
        self.algo == Algorithm::Reverse
    }
}
