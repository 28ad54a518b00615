//! Forecast evaluation: TPC splits, Average Difference, sweeps and
//! cross-run aggregation, plus the learning-curve CSV format.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_models::{self, CurveError, CurveFamily, CurveFit, CurvePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no training points at or below the cutoff {0}")]
    EmptyTrain(f64),
    #[error("no test points above the cutoff {0}")]
    EmptyTest(f64),
    #[error("cannot aggregate an empty list of evaluations")]
    EmptyList,
    #[error("invalid learning curve: {0}")]
    InvalidCurve(String),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Error)]
pub enum CurveFileError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header: expected `training_percent,metric,value`, found `{0}`")]
    Header(String),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error(transparent)]
    Curve(#[from] EvalError),
}

/// Performance metric recorded on a learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    FMeasure,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Accuracy, Metric::FMeasure];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::FMeasure => "f_measure",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accuracy" => Ok(Metric::Accuracy),
            "f_measure" | "f-measure" | "fmeasure" => Ok(Metric::FMeasure),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Ordered (training percent, metric value) points for one run and metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    points: Vec<CurvePoint>,
    pub metric: Metric,
    pub provenance: String,
}

impl LearningCurve {
    /// Requires at least two points with strictly increasing positive `x`.
    pub fn new(
        points: Vec<CurvePoint>,
        metric: Metric,
        provenance: impl Into<String>,
    ) -> Result<Self, EvalError> {
        if points.len() < 2 {
            return Err(EvalError::InvalidCurve(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.x > 0.0) || !p.x.is_finite() || !p.y.is_finite()) {
            return Err(EvalError::InvalidCurve("non-positive or non-finite point".into()));
        }
        if points.windows(2).any(|w| w[1].x <= w[0].x) {
            return Err(EvalError::InvalidCurve("x values must be strictly increasing".into()));
        }
        Ok(Self {
            points,
            metric,
            provenance: provenance.into(),
        })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn min_x(&self) -> f64 {
        self.points[0].x
    }

    pub fn max_x(&self) -> f64 {
        self.points[self.points.len() - 1].x
    }
}

/// Training percent cutoff, batch percent and family for one forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub tpc: f64,
    pub bp: f64,
    pub family: CurveFamily,
}

impl EvaluationConfig {
    pub fn new(tpc: f64, bp: f64, family: CurveFamily) -> Result<Self, EvalError> {
        if !(tpc > 0.0 && tpc < 100.0) {
            return Err(EvalError::InvalidConfig(format!("tpc must be in (0, 100), got {tpc}")));
        }
        if !(bp > 0.0 && bp <= 100.0) {
            return Err(EvalError::InvalidConfig(format!("bp must be in (0, 100], got {bp}")));
        }
        Ok(Self { tpc, bp, family })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEvaluation {
    pub average_difference: f64,
    pub n: usize,
    /// `|f(x_i) - y_i|` in test order.
    pub residuals: Vec<f64>,
    pub fit: CurveFit,
}

/// Partitions the curve: `x <= tpc` trains the forecaster, `x > tpc` tests it.
pub fn split_at_tpc(
    curve: &LearningCurve,
    tpc: f64,
) -> Result<(Vec<CurvePoint>, Vec<CurvePoint>), EvalError> {
    let cut = curve.points.partition_point(|p| p.x <= tpc);
    if cut == 0 {
        return Err(EvalError::EmptyTrain(tpc));
    }
    if cut == curve.points.len() {
        return Err(EvalError::EmptyTest(tpc));
    }
    Ok((curve.points[..cut].to_vec(), curve.points[cut..].to_vec()))
}

/// Mean absolute difference between forecast and observation over `test`.
pub fn average_difference(fit: &CurveFit, test: &[CurvePoint]) -> Result<ForecastEvaluation, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTest(f64::NAN));
    }
    let residuals = test
        .iter()
        .map(|p| Ok((curve_models::predict(fit, p.x)? - p.y).abs()))
        .collect::<Result<Vec<f64>, CurveError>>()?;
    let n = residuals.len();
    Ok(ForecastEvaluation {
        average_difference: residuals.iter().sum::<f64>() / n as f64,
        n,
        residuals,
        fit: fit.clone(),
    })
}

/// Number of test points a regular grid of spacing `bp` leaves above `tpc`,
/// `floor((100 - tpc) / bp)`.
pub fn expected_n(config: &EvaluationConfig) -> usize {
    let q = (100.0 - config.tpc) / config.bp;
    // Absorb representation error so e.g. 85/0.25 never lands on 339.999..
    (q + 1e-9).floor().max(0.0) as usize
}

/// Split, fit and evaluate at a single cutoff.
pub fn forecast_at(
    curve: &LearningCurve,
    tpc: f64,
    family: CurveFamily,
) -> Result<ForecastEvaluation, EvalError> {
    let (train, test) = split_at_tpc(curve, tpc)?;
    let fit = curve_models::fit(&train, family)?;
    average_difference(&fit, &test)
}

/// Evaluates a forecast at every cutoff; failures are kept per entry.
pub fn sweep_tpc(
    curve: &LearningCurve,
    tpc_values: &[f64],
    family: CurveFamily,
) -> Vec<(f64, Result<ForecastEvaluation, EvalError>)> {
    tpc_values
        .iter()
        .map(|&tpc| (tpc, forecast_at(curve, tpc, family)))
        .collect()
}

/// Unweighted mean of the evaluations' average differences.
pub fn aggregate<'a, I>(evaluations: I) -> Result<f64, EvalError>
where
    I: IntoIterator<Item = &'a ForecastEvaluation>,
{
    mean(evaluations.into_iter().map(|e| e.average_difference))
}

/// Unweighted mean of plain average-difference values.
pub fn mean(values: impl IntoIterator<Item = f64>) -> Result<f64, EvalError> {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        return Err(EvalError::EmptyList);
    }
    Ok(sum / count as f64)
}

/// Writes curves as `training_percent,metric,value` rows, interleaving
/// metrics per x position. All curves must share one x grid.
pub fn write_curves<W: Write>(writer: W, curves: &[&LearningCurve]) -> Result<(), CurveFileError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["training_percent", "metric", "value"])?;
    let len = curves.iter().map(|c| c.points.len()).max().unwrap_or(0);
    for i in 0..len {
        for c in curves {
            if let Some(p) = c.points.get(i) {
                w.write_record([
                    format!("{:.6}", p.x),
                    c.metric.name().to_string(),
                    format!("{:.6}", p.y),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve CSV into one [`LearningCurve`] per metric present.
pub fn read_curves<R: Read>(
    reader: R,
    provenance: &str,
) -> Result<BTreeMap<Metric, LearningCurve>, CurveFileError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["training_percent", "metric", "value"] {
        return Err(CurveFileError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut raw: BTreeMap<Metric, Vec<CurvePoint>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |msg: String| CurveFileError::Row { row, msg };
        let x: f64 = rec[0].parse().map_err(|e| bad(format!("training_percent: {e}")))?;
        let metric: Metric = rec[1].parse().map_err(bad)?;
        let y: f64 = rec[2]
            .parse()
            .map_err(|e| CurveFileError::Row { row, msg: format!("value: {e}") })?;
        raw.entry(metric).or_default().push(CurvePoint::new(x, y));
    }
    raw.into_iter()
        .map(|(m, pts)| Ok((m, LearningCurve::new(pts, m, provenance)?)))
        .collect()
}
