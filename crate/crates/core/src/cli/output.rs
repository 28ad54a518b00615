//! Serialized output records. Floating-point values are written with six
//! decimal places so repeated runs diff cleanly.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::al_simulator::{label_rows, RunRecord, SimulationConfig};
use crate::curve_models::CurveFamily;
use crate::forecast_eval::Metric;
use crate::stopping::{PredictionHistory, StopComparison, StoppingDecision};
use crate::text_pipeline::Label;

/// An `f64` that serializes to JSON as a fixed six-decimal number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed6(pub f64);

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.6}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fixed6 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Option::<f64>::deserialize(d).map(|v| Fixed6(v.unwrap_or(f64::NAN)))
    }
}

pub fn fixed(values: impl IntoIterator<Item = f64>) -> Vec<Fixed6> {
    values.into_iter().map(Fixed6).collect()
}

/// JSON manifest for one simulated run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SimulationConfig,
    pub run_seed: u64,
    pub fold: Option<usize>,
    pub pool_size: usize,
    pub test_size: usize,
    pub vocabulary_size: usize,
    pub final_labeled: usize,
    pub final_unlabeled: usize,
    pub training_percents: Vec<Fixed6>,
    pub accuracy: Vec<Fixed6>,
    pub f_measure: Vec<Fixed6>,
    pub stop_set_ids: Vec<String>,
    #[serde(with = "label_rows")]
    pub stop_set_predictions: Vec<Vec<Label>>,
}

impl RunManifest {
    pub fn from_record(r: &RunRecord) -> Self {
        Self {
            config: r.config,
            run_seed: r.run_seed,
            fold: r.fold,
            pool_size: r.pool_size,
            test_size: r.test_size,
            vocabulary_size: r.vocabulary_size,
            final_labeled: r.final_labeled,
            final_unlabeled: r.final_unlabeled,
            training_percents: fixed(r.accuracy_curve.points().iter().map(|p| p.x)),
            accuracy: fixed(r.accuracy_curve.points().iter().map(|p| p.y)),
            f_measure: fixed(r.f_measure_curve.points().iter().map(|p| p.y)),
            stop_set_ids: r.stop_set_ids.clone(),
            stop_set_predictions: r.stop_set_predictions.clone(),
        }
    }

    pub fn prediction_history(&self) -> PredictionHistory {
        PredictionHistory {
            training_percents: self.training_percents.iter().map(|v| v.0).collect(),
            predictions: self.stop_set_predictions.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastReport {
    pub curve: String,
    pub metric: Metric,
    pub family: CurveFamily,
    pub tpc: Fixed6,
    pub a: Fixed6,
    pub b: Fixed6,
    pub sse: Fixed6,
    pub num_points: usize,
    pub clamped: bool,
    pub n: usize,
    pub bp: Option<Fixed6>,
    pub expected_n: Option<usize>,
    pub average_difference: Fixed6,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoppingReport {
    pub fired: bool,
    pub iteration: Option<usize>,
    pub stopping_percent: Option<Fixed6>,
    pub kappa_trace: Vec<Fixed6>,
    pub threshold: Fixed6,
    pub window: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub stopping_percent: Fixed6,
    pub tpc: Fixed6,
    pub precedes: bool,
}

impl StoppingReport {
    pub fn new(d: &StoppingDecision, threshold: f64, window: usize, cmp: Option<StopComparison>) -> Self {
        Self {
            fired: d.fired,
            iteration: d.iteration,
            stopping_percent: d.stopping_percent.map(Fixed6),
            kappa_trace: fixed(d.kappa_trace.iter().copied()),
            threshold: Fixed6(threshold),
            window,
            comparison: cmp.map(|c| ComparisonReport {
                stopping_percent: Fixed6(c.stopping_percent),
                tpc: Fixed6(c.tpc),
                precedes: c.precedes,
            }),
        }
    }
}

/// One cell of the sweep matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub learner: String,
    pub strategy: String,
    pub bp: String,
    pub metric: String,
    pub family: String,
    pub tpc: String,
    pub n: String,
    pub average_difference: String,
    pub error: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed6_json() {
        let v = vec![Fixed6(0.1), Fixed6(2.0), Fixed6(f64::NAN)];
        assert_eq!(serde_json::to_string(&v).unwrap(), "[0.100000,2.000000,null]");
        let back: Vec<Fixed6> = serde_json::from_str("[0.100000,2.000000]").unwrap();
        assert_eq!(back, vec![Fixed6(0.1), Fixed6(2.0)]);
    }
}
