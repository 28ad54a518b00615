//! Stabilizing-predictions stopping detector.
//!
//! Consecutive models label a fixed stop set; learning is considered stable
//! once Cohen's kappa between successive labelings stays at or above a
//! threshold for `window` consecutive comparisons.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text_pipeline::Label;

pub const DEFAULT_THRESHOLD: f64 = 0.99;
pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_STOP_SET_SIZE: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StopError {
    #[error("label lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label lists are empty")]
    EmptyInput,
    #[error("history of {iterations} iterations is too short for a window of {window}")]
    HistoryTooShort { iterations: usize, window: usize },
    #[error("threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("window must be at least 1")]
    InvalidWindow,
    #[error("history has {0} prediction rows but {1} training percents")]
    RaggedHistory(usize, usize),
    #[error("stopping never fired")]
    NotFired,
}

/// Cohen's kappa between two labelings of the same items.
///
/// When both labelings are constant and equal the chance agreement is 1 and
/// kappa is defined as 1 (or 0 if observed agreement is below 1).
pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, StopError> {
    if a.len() != b.len() {
        return Err(StopError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StopError::EmptyInput);
    }
    let n = a.len() as f64;
    let mut agree = 0usize;
    let mut counts: HashMap<&T, (usize, usize)> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        if x == y {
            agree += 1;
        }
        counts.entry(x).or_default().0 += 1;
        counts.entry(y).or_default().1 += 1;
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = counts
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    if p_e >= 1.0 {
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Per-iteration stop-set predictions with the training percent of each
/// iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionHistory {
    pub training_percents: Vec<f64>,
    pub predictions: Vec<Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingDecision {
    pub fired: bool,
    /// Iteration index (0-based) whose model triggered the stop.
    pub iteration: Option<usize>,
    pub stopping_percent: Option<f64>,
    /// `kappa_trace[j]` compares iterations `j` and `j + 1`.
    pub kappa_trace: Vec<f64>,
}

pub fn kappa_trace(history: &[Vec<Label>]) -> Result<Vec<f64>, StopError> {
    history
        .windows(2)
        .map(|w| cohens_kappa(&w[0], &w[1]))
        .collect()
}

/// First position `j` in `trace` where the `window` values ending at `j`
/// are all at or above `threshold`.
pub fn first_stable(trace: &[f64], threshold: f64, window: usize) -> Option<usize> {
    let mut run = 0;
    for (j, &k) in trace.iter().enumerate() {
        if k >= threshold {
            run += 1;
            if run >= window {
                return Some(j);
            }
        } else {
            run = 0;
        }
    }
    None
}

fn check_params(threshold: f64, window: usize) -> Result<(), StopError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(StopError::InvalidThreshold(threshold));
    }
    if window == 0 {
        return Err(StopError::InvalidWindow);
    }
    Ok(())
}

pub fn sp_stopping(
    history: &PredictionHistory,
    threshold: f64,
    window: usize,
) -> Result<StoppingDecision, StopError> {
    check_params(threshold, window)?;
    let rows = history.predictions.len();
    if rows != history.training_percents.len() {
        return Err(StopError::RaggedHistory(rows, history.training_percents.len()));
    }
    if rows < 2 || rows - 1 < window {
        return Err(StopError::HistoryTooShort {
            iterations: rows,
            window,
        });
    }
    let trace = kappa_trace(&history.predictions)?;
    Ok(decide(trace, &history.training_percents, threshold, window))
}

fn decide(trace: Vec<f64>, percents: &[f64], threshold: f64, window: usize) -> StoppingDecision {
    match first_stable(&trace, threshold, window) {
        Some(j) => StoppingDecision {
            fired: true,
            iteration: Some(j + 1),
            stopping_percent: Some(percents[j + 1]),
            kappa_trace: trace,
        },
        None => StoppingDecision {
            fired: false,
            iteration: None,
            stopping_percent: None,
            kappa_trace: trace,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopComparison {
    pub stopping_percent: f64,
    pub tpc: f64,
    /// True when stopping happens strictly before the cutoff, i.e. a forecast
    /// at this cutoff would already cost annotations past the stop point.
    pub precedes: bool,
}

pub fn compare_stop_to_tpc(decision: &StoppingDecision, tpc: f64) -> Result<StopComparison, StopError> {
    match (decision.fired, decision.stopping_percent) {
        (true, Some(stopping_percent)) => Ok(StopComparison {
            stopping_percent,
            tpc,
            precedes: stopping_percent < tpc,
        }),
        _ => Err(StopError::NotFired),
    }
}
