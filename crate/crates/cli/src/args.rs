use std::path::PathBuf;

use baserate_core::combine::DEFAULT_IQR_MULTIPLIER;
use baserate_core::metrics::DEFAULT_MSIS_ALPHA;
use baserate_core::{Frequency, Scheme, Selection};
use clap::{Args, Parser, Subcommand};

pub const DEFAULT_SEED: u64 = 20_210_901;

#[derive(Debug, Parser)]
#[command(name = "baserate", version, about = "Model selection and combination with revised base-rates")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a corpus into training and held-out test files.
    Split(SplitArgs),
    /// Build the contingency table from a reference corpus.
    BuildTable(BuildTableArgs),
    /// Forecast a target corpus with one or more schemes.
    Forecast(ForecastArgs),
    /// Score forecasts against held-out actuals.
    Evaluate(EvaluateArgs),
}

fn parse_frequency(s: &str) -> Result<Frequency, String> {
    s.parse().map_err(|e: baserate_core::Error| e.to_string())
}

fn parse_selection(s: &str) -> Result<Selection, String> {
    s.parse().map_err(|e: baserate_core::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Sampling frequency: yearly, quarterly or monthly.
    #[arg(long, value_parser = parse_frequency)]
    pub frequency: Frequency,

    /// Forecast horizon [default: 6 yearly, 8 quarterly, 12 monthly].
    #[arg(long)]
    pub horizon: Option<usize>,
}

impl SeriesArgs {
    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| self.frequency.default_horizon())
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub series: SeriesArgs,

    /// Corpus CSV: one series per row, id then observations.
    #[arg(long)]
    pub corpus: PathBuf,

    /// Output for the first T - h observations of each series.
    #[arg(long)]
    pub train: PathBuf,

    /// Output for the last h observations of each series.
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildTableArgs {
    #[command(flatten)]
    pub series: SeriesArgs,

    /// Reference corpus CSV. Each series is split into T - h training and h
    /// test observations internally.
    #[arg(long)]
    pub corpus: PathBuf,

    /// Selection criterion: bic, aic, aicc or validation.
    #[arg(long, default_value = "bic", value_parser = parse_selection)]
    pub criterion: Selection,

    /// Output table (JSON).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub series: SeriesArgs,

    /// Target corpus CSV (training observations only).
    #[arg(long)]
    pub corpus: PathBuf,

    /// Contingency table (JSON); required by aggregate, precision and
    /// sensitivity schemes.
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Selection criterion: bic, aic, aicc or validation.
    #[arg(long, default_value = "bic", value_parser = parse_selection)]
    pub criterion: Selection,

    /// Comma-separated schemes, or "all".
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub schemes: Vec<String>,

    /// Prediction interval coverage.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Simulated sample paths per model.
    #[arg(long, default_value_t = 5000)]
    pub num_paths: usize,

    /// Seed for the simulated paths.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Fence multiplier of the interquartile-range model exclusion.
    #[arg(long, default_value_t = DEFAULT_IQR_MULTIPLIER)]
    pub iqr_multiplier: f64,

    /// Point forecasts only: bounds equal the point forecast and the
    /// interval-based exclusion is skipped.
    #[arg(long)]
    pub no_intervals: bool,

    /// Output forecasts CSV.
    #[arg(long)]
    pub output: PathBuf,

    /// Also write every pool model's forecasts here.
    #[arg(long)]
    pub model_output: Option<PathBuf>,

    /// Also write the model chosen by each select scheme here.
    #[arg(long)]
    pub selections: Option<PathBuf>,
}

impl ForecastArgs {
    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>, baserate_core::Error> {
        let mut out = Vec::new();
        for name in &self.schemes {
            let name = name.trim();
            if name.eq_ignore_ascii_case("all") {
                out.extend(Scheme::ALL);
            } else {
                out.push(name.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Sampling frequency (sets the seasonal period of the scaling).
    #[arg(long, value_parser = parse_frequency)]
    pub frequency: Frequency,

    /// Training observations, as passed to `forecast`.
    #[arg(long)]
    pub insample: PathBuf,

    /// Held-out actuals.
    #[arg(long)]
    pub actuals: PathBuf,

    /// Forecasts CSV written by `forecast`.
    #[arg(long)]
    pub forecasts: PathBuf,

    /// Selection criterion label for the metrics file.
    #[arg(long, default_value = "bic")]
    pub criterion: String,

    /// Tail probability of the interval score.
    #[arg(long, default_value_t = DEFAULT_MSIS_ALPHA)]
    pub msis_alpha: f64,

    /// Significance level of the Nemenyi test: 0.01, 0.05 or 0.10.
    #[arg(long, default_value_t = 0.05)]
    pub significance_alpha: f64,

    /// Output metrics CSV.
    #[arg(long)]
    pub metrics: PathBuf,

    /// Output pairwise significance CSV.
    #[arg(long)]
    pub significance: PathBuf,

    /// Per-model forecasts (from `forecast --model-output`), for rank thirds.
    #[arg(long, requires_all = ["selections", "rank_thirds"])]
    pub model_forecasts: Option<PathBuf>,

    /// Select-scheme choices (from `forecast --selections`), for rank thirds.
    #[arg(long, requires = "model_forecasts")]
    pub selections: Option<PathBuf>,

    /// Output rank-thirds CSV.
    #[arg(long, requires = "model_forecasts")]
    pub rank_thirds: Option<PathBuf>,
}
