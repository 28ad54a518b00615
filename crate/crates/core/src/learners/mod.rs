//! Binary base learners and held-out metrics.

mod linear;
mod metrics;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::linear::{decision_value, train_linear, LinearModel, LinearParams};
pub use self::metrics::{evaluate, MetricReport};
pub use self::tree::{gini, train_tree, TreeNode, TreeParams};
pub use crate::text_pipeline::{FeatureVector, Label};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("no training data")]
    EmptyData,
    #[error("no predictions to evaluate")]
    EmptyInput,
    #[error("length mismatch: {0} predictions vs {1} gold labels")]
    LengthMismatch(usize, usize),
    #[error("feature index {0} out of range for {1} features")]
    FeatureOutOfRange(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// Anything that assigns a binary label to a feature vector.
pub trait Classifier {
    fn predict(&self, v: &FeatureVector) -> Label;

    fn predict_all<'a, I>(&self, vs: I) -> Vec<Label>
    where
        I: IntoIterator<Item = &'a FeatureVector>,
        Self: Sized,
    {
        vs.into_iter().map(|v| self.predict(v)).collect()
    }
}

impl Classifier for LinearModel {
    fn predict(&self, v: &FeatureVector) -> Label {
        Label::from_sign(self.decision_value(v))
    }
}

impl Classifier for TreeNode {
    fn predict(&self, v: &FeatureVector) -> Label {
        TreeNode::predict(self, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Linear,
    Tree,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Linear => "linear",
            LearnerKind::Tree => "tree",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" | "svm" => Ok(LearnerKind::Linear),
            "tree" | "decision_tree" => Ok(LearnerKind::Tree),
            other => Err(format!("unknown learner `{other}`")),
        }
    }
}

/// A trained model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Tree(TreeNode),
}

impl Model {
    pub fn as_linear(&self) -> Option<&LinearModel> {
        match self {
            Model::Linear(m) => Some(m),
            Model::Tree(_) => None,
        }
    }
}

impl Classifier for Model {
    fn predict(&self, v: &FeatureVector) -> Label {
        match self {
            Model::Linear(m) => m.predict(v),
            Model::Tree(t) => t.predict(v),
        }
    }
}

/// Learner choice plus hyperparameters for both kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub linear: LinearParams,
    pub tree: TreeParams,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            kind: LearnerKind::Linear,
            linear: LinearParams::default(),
            tree: TreeParams::default(),
        }
    }
}

impl LearnerConfig {
    pub fn train(
        &self,
        data: &[(FeatureVector, Label)],
        num_features: usize,
        seed: u64,
    ) -> Result<Model, LearnError> {
        match self.kind {
            LearnerKind::Linear => train_linear(data, num_features, &self.linear, seed).map(Model::Linear),
            LearnerKind::Tree => train_tree(data, num_features, &self.tree).map(Model::Tree),
        }
    }
}
