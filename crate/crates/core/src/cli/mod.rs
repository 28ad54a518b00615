//! Command-line driver: `simulate`, `forecast`, `sweep`, `stop`, `gen-corpus`.
//!
//! Every flag can also come from a flat JSON config file (`--config`) whose
//! keys are the long flag names; flags given on the command line win.

mod commands;
mod output;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::al_simulator::Strategy;
use crate::curve_models::CurveFamily;
use crate::forecast_eval::Metric;
use crate::learners::LearnerKind;

pub use self::commands::{cmd_forecast, cmd_gen_corpus, cmd_simulate, cmd_stop, cmd_sweep};
pub use self::output::{Fixed6, ForecastReport, RunManifest, StoppingReport, SweepRow};

#[derive(Debug, Parser)]
#[command(name = "lcforecast", version, about = "Learning-curve forecasting for iterative text classification")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlobalArgs {
    /// Master seed.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory (default: out).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// JSON config file with flat keys named like the long flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads for folds and sweep cells.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl GlobalArgs {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iterative learning simulator and write learning curves.
    Simulate(SimulateArgs),
    /// Fit a curve family below a cutoff and score it above.
    Forecast(ForecastArgs),
    /// Grid of simulations and forecasts written as one CSV matrix.
    Sweep(SweepArgs),
    /// Stabilizing-predictions stopping analysis on a run manifest.
    Stop(StopArgs),
    /// Write a synthetic two-topic corpus.
    GenCorpus(GenCorpusArgs),
}

/// Learner and simulator knobs shared by `simulate` and `sweep`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimKnobs {
    /// Folds for cross validation; 0 uses the corpus split field.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_batch: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    /// L2 regularization of the linear learner.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reg: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_set_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_frequency: Option<usize>,
    /// Stopword file (one token per line); defaults to the bundled list.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// Corpus in JSON Lines format.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    /// Batch percent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bp: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerKind>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: SimKnobs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ForecastArgs {
    /// Learning-curve CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<PathBuf>,
    /// Training percent cutoff.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpc: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<CurveFamily>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    /// Batch percent for the expected test-point count; inferred from the grid if absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bp: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    /// Corpora to simulate (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<Vec<PathBuf>>,
    /// Precomputed learning-curve CSVs to forecast directly.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<PathBuf>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learners: Option<Vec<LearnerKind>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<Strategy>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<CurveFamily>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpcs: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: SimKnobs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct StopArgs {
    /// Run manifest written by `simulate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Compare the stopping percent against this cutoff.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpc: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenCorpusArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topic_words: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_words: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doc_length: Option<usize>,
    /// Output file (default: <out-dir>/corpus.jsonl).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Overlays the explicitly given fields of `cli` onto `config`.
pub fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: &Map<String, Value>) -> Result<T> {
    let mut merged = config.clone();
    match serde_json::to_value(cli)? {
        Value::Object(given) => merged.extend(given),
        other => anyhow::bail!("unexpected argument shape: {other}"),
    }
    serde_json::from_value(Value::Object(merged)).context("invalid value in config file")
}

pub fn load_config(path: Option<&std::path::Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
        Value::Object(map) => Ok(map),
        _ => anyhow::bail!("config {} must be a JSON object", path.display()),
    }
}

/// Parses nothing; runs an already-parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.global.config.as_deref())?;
    let global = merge(&cli.global, &config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(global.jobs.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    pool.install(|| match &cli.command {
        Command::Simulate(a) => cmd_simulate(&global, &merge(a, &config)?).map(|_| ()),
        Command::Forecast(a) => cmd_forecast(&global, &merge(a, &config)?).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&global, &merge(a, &config)?).map(|_| ()),
        Command::Stop(a) => cmd_stop(&global, &merge(a, &config)?).map(|_| ()),
        Command::GenCorpus(a) => cmd_gen_corpus(&global, &merge(a, &config)?).map(|_| ()),
    })
}
