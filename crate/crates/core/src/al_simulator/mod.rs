//! Pool-based iterative learning simulator.
//!
//! Each run starts with a random batch from the training pool, then repeats:
//! train on the labeled set, score the held-out test set, record stop-set
//! predictions, and move the next batch from the unlabeled pool, until the
//! pool is exhausted. Batches are chosen at random (passive) or by smallest
//! absolute margin under the current linear model (active).

mod folds;
mod selection;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::folds::{kfold_split, Fold};
pub use self::selection::{select_closest_to_hyperplane, select_random};

use crate::curve_models::CurvePoint;
use crate::forecast_eval::{EvalError, LearningCurve, Metric};
use crate::learners::{evaluate, Classifier, FeatureVector, Label, LearnError, LearnerConfig, LearnerKind, MetricReport};
use crate::stopping::{PredictionHistory, DEFAULT_STOP_SET_SIZE};
use crate::text_pipeline::{self, Document, Split, TextError, DEFAULT_MIN_FREQUENCY};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("training pool is empty")]
    EmptyPool,
    #[error("no test documents")]
    EmptyTest,
    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),
    #[error("cannot select {k} items from {available}")]
    KTooLarge { k: usize, available: usize },
    #[error("{docs} documents cannot fill {folds} folds")]
    TooFewDocuments { docs: usize, folds: usize },
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Curve(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    ClosestToHyperplane,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::ClosestToHyperplane => "closest_to_hyperplane",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" | "passive" => Ok(Strategy::Random),
            "closest_to_hyperplane" | "closest" | "active" => Ok(Strategy::ClosestToHyperplane),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Percent of the original pool labeled per iteration.
    pub bp: f64,
    pub strategy: Strategy,
    pub learner: LearnerConfig,
    pub seed: u64,
    /// 0 uses the corpus' own train/test split.
    pub folds: usize,
    /// Size of the random seed batch; defaults to one regular batch.
    pub initial_batch: Option<usize>,
    pub stop_set_size: usize,
    pub min_frequency: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            bp: 1.0,
            strategy: Strategy::Random,
            learner: LearnerConfig::default(),
            seed: 0,
            folds: 0,
            initial_batch: None,
            stop_set_size: DEFAULT_STOP_SET_SIZE,
            min_frequency: DEFAULT_MIN_FREQUENCY,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.bp > 0.0 && self.bp <= 100.0) {
            return Err(SimError::ConfigInvalid(format!("bp must be in (0, 100], got {}", self.bp)));
        }
        if self.strategy == Strategy::ClosestToHyperplane && self.learner.kind != LearnerKind::Linear {
            return Err(SimError::ConfigInvalid(
                "closest_to_hyperplane selection requires the linear learner".into(),
            ));
        }
        if self.folds == 1 {
            return Err(SimError::ConfigInvalid("folds must be 0 or at least 2".into()));
        }
        if self.stop_set_size == 0 {
            return Err(SimError::ConfigInvalid("stop_set_size must be positive".into()));
        }
        if self.initial_batch == Some(0) {
            return Err(SimError::ConfigInvalid("initial_batch must be positive".into()));
        }
        Ok(())
    }

    /// `floor(bp% of pool)`, at least 1.
    pub fn batch_size(&self, pool: usize) -> usize {
        ((self.bp / 100.0 * pool as f64 + 1e-9).floor() as usize).max(1)
    }
}

/// SplitMix64 finalizer over `(master, stream)`; gives each run or iteration
/// its own generator independent of scheduling.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_STOP_SET: u64 = 1;
const STREAM_SELECTION: u64 = 2;
const STREAM_TRAINING: u64 = 3;

/// One simulated run (one fold, or the fixed split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: SimulationConfig,
    /// Seed this run actually used (derived per fold).
    pub run_seed: u64,
    pub fold: Option<usize>,
    pub pool_size: usize,
    pub test_size: usize,
    pub vocabulary_size: usize,
    pub final_labeled: usize,
    pub final_unlabeled: usize,
    pub accuracy_curve: LearningCurve,
    pub f_measure_curve: LearningCurve,
    pub reports: Vec<MetricReport>,
    pub stop_set_ids: Vec<String>,
    #[serde(with = "label_rows")]
    pub stop_set_predictions: Vec<Vec<Label>>,
}

impl RunRecord {
    pub fn curve(&self, metric: Metric) -> &LearningCurve {
        match metric {
            Metric::Accuracy => &self.accuracy_curve,
            Metric::FMeasure => &self.f_measure_curve,
        }
    }

    pub fn prediction_history(&self) -> PredictionHistory {
        PredictionHistory {
            training_percents: self.accuracy_curve.points().iter().map(|p| p.x).collect(),
            predictions: self.stop_set_predictions.clone(),
        }
    }
}

/// Stop-set prediction rows serialized as strings of `1` (pos) / `0` (neg).
pub mod label_rows {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use crate::text_pipeline::Label;

    pub fn encode(row: &[Label]) -> String {
        row.iter().map(|l| if l.is_positive() { '1' } else { '0' }).collect()
    }

    pub fn decode(s: &str) -> Result<Vec<Label>, String> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(Label::Positive),
                '0' => Ok(Label::Negative),
                other => Err(format!("invalid prediction character `{other}`")),
            })
            .collect()
    }

    pub fn serialize<S: Serializer>(rows: &[Vec<Label>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rows.iter().map(|r| encode(r)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Label>>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| decode(s).map_err(de::Error::custom))
            .collect()
    }
}

/// Runs the configured simulation with the default stopword list.
pub fn run_simulation(corpus: &[Document], config: &SimulationConfig) -> Result<Vec<RunRecord>, SimError> {
    run_simulation_with(corpus, config, &text_pipeline::default_stopwords())
}

/// Runs one simulation per fold (or one on the corpus' fixed split when
/// `folds == 0`). Folds run in parallel; results are in fold order.
pub fn run_simulation_with(
    corpus: &[Document],
    config: &SimulationConfig,
    stopwords: &HashSet<String>,
) -> Result<Vec<RunRecord>, SimError> {
    config.validate()?;
    if config.folds == 0 {
        let pool: Vec<usize> = (0..corpus.len()).filter(|&i| corpus[i].split == Split::Train).collect();
        let test: Vec<usize> = (0..corpus.len()).filter(|&i| corpus[i].split == Split::Test).collect();
        let rec = simulate_split(corpus, &pool, &test, config, stopwords, None, config.seed)?;
        return Ok(vec![rec]);
    }
    let splits = kfold_split(corpus.len(), config.folds, config.seed)?;
    splits
        .into_par_iter()
        .enumerate()
        .map(|(fold, (mut pool, test))| {
            pool.sort_unstable();
            let seed = derive_seed(config.seed, fold as u64);
            simulate_split(corpus, &pool, &test, config, stopwords, Some(fold), seed)
        })
        .collect()
}

/// One run over an explicit pool/test partition of `corpus` (indices).
pub fn simulate_split(
    corpus: &[Document],
    pool: &[usize],
    test: &[usize],
    config: &SimulationConfig,
    stopwords: &HashSet<String>,
    fold: Option<usize>,
    seed: u64,
) -> Result<RunRecord, SimError> {
    config.validate()?;
    if pool.is_empty() {
        return Err(SimError::EmptyPool);
    }
    if test.is_empty() {
        return Err(SimError::EmptyTest);
    }
    let pool_docs: Vec<&Document> = pool.iter().map(|&i| &corpus[i]).collect();
    let vocab = text_pipeline::build_vocabulary(pool_docs.iter().copied(), stopwords, config.min_frequency)?;
    let pool_vecs: Vec<FeatureVector> = pool_docs.iter().map(|d| text_pipeline::vectorize(d, &vocab)).collect();
    let test_vecs: Vec<FeatureVector> = test
        .iter()
        .map(|&i| text_pipeline::vectorize(&corpus[i], &vocab))
        .collect();
    let test_gold: Vec<Label> = test.iter().map(|&i| corpus[i].label).collect();
    let n_pool = pool.len();
    let dim = vocab.len();

    // positions into `pool`
    let all_pos: Vec<usize> = (0..n_pool).collect();
    let mut stop_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_STOP_SET));
    let mut stop_set = select_random(&all_pos, config.stop_set_size.min(n_pool), &mut stop_rng)?;
    stop_set.sort_unstable();

    let batch = config.batch_size(n_pool);
    let initial = config.initial_batch.unwrap_or(batch).min(n_pool);
    let mut sel_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_SELECTION));
    let train_seed_base = derive_seed(seed, STREAM_TRAINING);

    let mut labeled: BTreeSet<usize> = select_random(&all_pos, initial, &mut sel_rng)?.into_iter().collect();
    let mut unlabeled: BTreeSet<usize> = all_pos.iter().copied().filter(|p| !labeled.contains(p)).collect();

    let mut acc_pts = Vec::new();
    let mut f_pts = Vec::new();
    let mut reports = Vec::new();
    let mut stop_preds = Vec::new();
    let mut iteration = 0u64;
    loop {
        let data: Vec<(FeatureVector, Label)> = labeled
            .iter()
            .map(|&p| (pool_vecs[p].clone(), pool_docs[p].label))
            .collect();
        let model = config
            .learner
            .train(&data, dim, derive_seed(train_seed_base, iteration))?;

        let predictions = model.predict_all(&test_vecs);
        let report = evaluate(&predictions, &test_gold)?;
        let x = 100.0 * labeled.len() as f64 / n_pool as f64;
        acc_pts.push(CurvePoint::new(x, report.accuracy));
        f_pts.push(CurvePoint::new(x, report.f_measure));
        reports.push(report);
        stop_preds.push(stop_set.iter().map(|&p| model.predict(&pool_vecs[p])).collect::<Vec<_>>());

        if unlabeled.is_empty() {
            break;
        }
        let k = batch.min(unlabeled.len());
        let candidates: Vec<usize> = unlabeled.iter().copied().collect();
        let chosen = match config.strategy {
            Strategy::Random => select_random(&candidates, k, &mut sel_rng)?,
            Strategy::ClosestToHyperplane => {
                let linear = model.as_linear().ok_or_else(|| {
                    SimError::ConfigInvalid("closest_to_hyperplane requires a linear model".into())
                })?;
                let scored: Vec<((&str, usize), &FeatureVector)> = candidates
                    .iter()
                    .map(|&p| ((pool_docs[p].id.as_str(), p), &pool_vecs[p]))
                    .collect();
                select_closest_to_hyperplane(linear, &scored, k)?
                    .into_iter()
                    .map(|(_, p)| p)
                    .collect()
            }
        };
        for p in chosen {
            unlabeled.remove(&p);
            labeled.insert(p);
        }
        iteration += 1;
    }

    let provenance = match fold {
        Some(f) => format!("{}:{}:fold{}", config.learner.kind, config.strategy, f),
        None => format!("{}:{}", config.learner.kind, config.strategy),
    };
    if acc_pts.len() < 2 {
        return Err(SimError::ConfigInvalid(format!(
            "run produced {} iteration(s); a learning curve needs at least 2 (lower bp or initial_batch)",
            acc_pts.len()
        )));
    }
    Ok(RunRecord {
        config: *config,
        run_seed: seed,
        fold,
        pool_size: n_pool,
        test_size: test.len(),
        vocabulary_size: dim,
        final_labeled: labeled.len(),
        final_unlabeled: unlabeled.len(),
        accuracy_curve: LearningCurve::new(acc_pts, Metric::Accuracy, provenance.clone())?,
        f_measure_curve: LearningCurve::new(f_pts, Metric::FMeasure, provenance)?,
        reports,
        stop_set_ids: stop_set.iter().map(|&p| pool_docs[p].id.clone()).collect(),
        stop_set_predictions: stop_preds,
    })
}

/// Point-wise mean of one metric's curves across runs, by iteration index.
/// Runs of different length are truncated to the shortest.
pub fn average_curves(records: &[RunRecord], metric: Metric) -> Result<LearningCurve, SimError> {
    let len = records
        .iter()
        .map(|r| r.curve(metric).points().len())
        .min()
        .ok_or(SimError::EmptyPool)?;
    let n = records.len() as f64;
    let points = (0..len)
        .map(|i| {
            let (sx, sy) = records.iter().fold((0.0, 0.0), |(sx, sy), r| {
                let p = r.curve(metric).points()[i];
                (sx + p.x, sy + p.y)
            });
            CurvePoint::new(sx / n, sy / n)
        })
        .collect();
    Ok(LearningCurve::new(points, metric, format!("mean of {} runs", records.len()))?)
}
