//! Linear max-margin classifier trained with seeded stochastic subgradient
//! descent on the L2-regularized hinge loss.
//!
//! The bias is handled as the weight of an implicit always-on feature, so it
//! is regularized together with the other weights and shares the same
//! `1 / (reg * t)` step schedule. Weights are stored as `scale * v` which
//! makes the per-step shrinkage O(1) on sparse inputs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::text_pipeline::{FeatureVector, Label};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub epochs: usize,
    /// L2 regularization strength.
    pub reg: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self {
            epochs: 20,
            reg: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Set when training saw a single class and returned a constant classifier.
    pub single_class: bool,
}

impl LinearModel {
    pub fn zeros(num_features: usize) -> Self {
        Self {
            weights: vec![0.0; num_features],
            bias: 0.0,
            single_class: false,
        }
    }

    pub fn decision_value(&self, v: &FeatureVector) -> f64 {
        decision_value(self, v)
    }
}

/// `w . v + bias`. Indices beyond the weight vector contribute nothing.
pub fn decision_value(model: &LinearModel, v: &FeatureVector) -> f64 {
    v.indices()
        .iter()
        .filter_map(|&i| model.weights.get(i as usize))
        .sum::<f64>()
        + model.bias
}

struct ScaledWeights {
    v: Vec<f64>,
    vb: f64,
    scale: f64,
}

impl ScaledWeights {
    fn margin(&self, x: &FeatureVector) -> f64 {
        let dot: f64 = x.indices().iter().map(|&i| self.v[i as usize]).sum();
        self.scale * (dot + self.vb)
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|w| *w = 0.0);
            self.vb = 0.0;
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            let s = self.scale;
            self.v.iter_mut().for_each(|w| *w *= s);
            self.vb *= s;
            self.scale = 1.0;
        }
    }

    fn add(&mut self, x: &FeatureVector, step: f64) {
        let d = step / self.scale;
        for &i in x.indices() {
            self.v[i as usize] += d;
        }
        self.vb += d;
    }

    fn into_model(self) -> LinearModel {
        let s = self.scale;
        LinearModel {
            weights: self.v.into_iter().map(|w| w * s).collect(),
            bias: self.vb * s,
            single_class: false,
        }
    }
}

/// Trains a linear classifier over `num_features` dimensions. Each epoch
/// visits the examples in a seeded random order; identical data order, seed
/// and parameters give a bit-identical model.
pub fn train_linear(
    data: &[(FeatureVector, Label)],
    num_features: usize,
    params: &LinearParams,
    seed: u64,
) -> Result<LinearModel, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    if !(params.reg > 0.0) {
        return Err(LearnError::InvalidParam(format!("reg must be positive, got {}", params.reg)));
    }
    let first = data[0].1;
    if data.iter().all(|(_, l)| *l == first) {
        return Ok(LinearModel {
            weights: vec![0.0; num_features],
            bias: first.sign(),
            single_class: true,
        });
    }
    if let Some(bad) = data
        .iter()
        .flat_map(|(v, _)| v.indices().last())
        .find(|&&i| i as usize >= num_features)
    {
        return Err(LearnError::FeatureOutOfRange(*bad as usize, num_features));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut w = ScaledWeights {
        v: vec![0.0; num_features],
        vb: 0.0,
        scale: 1.0,
    };
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let (x, label) = &data[i];
            let y = label.sign();
            let eta = 1.0 / (params.reg * t as f64);
            let violated = y * w.margin(x) < 1.0;
            w.shrink(1.0 - eta * params.reg);
            if violated {
                w.add(x, eta * y);
            }
        }
    }
    Ok(w.into_model())
}
