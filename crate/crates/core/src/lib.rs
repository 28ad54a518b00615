//! Early forecasting of text-classification learning curves.
//!
//! The crate fits parametric curve families to the early part of a learning
//! curve, scores the extrapolation against the rest of the curve, and
//! produces learning curves itself through a pool-based passive/active
//! learning simulator with a stabilizing-predictions stopping detector.

pub mod al_simulator;
pub mod cli;
pub mod curve_models;
pub mod forecast_eval;
pub mod learners;
pub mod stopping;
pub mod synth;
pub mod text_pipeline;

pub use curve_models::{fit, fit_all, predict, CurveFamily, CurveFit, CurvePoint};
pub use forecast_eval::{
    aggregate, average_difference, expected_n, split_at_tpc, sweep_tpc, EvaluationConfig, ForecastEvaluation,
    LearningCurve, Metric,
};
