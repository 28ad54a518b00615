//! Greedy binary decision tree over presence/absence of features.

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::text_pipeline::{FeatureVector, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 30,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: Label,
    },
    Split {
        feature: u32,
        /// Taken when the feature is absent.
        absent: Box<TreeNode>,
        /// Taken when the feature is present.
        present: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, v: &FeatureVector) -> Label {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    absent,
                    present,
                } => {
                    node = if v.contains(*feature) { present } else { absent };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { absent, present, .. } => 1 + absent.depth().max(present.depth()),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { absent, present, .. } => absent.num_leaves() + present.num_leaves(),
        }
    }
}

/// Gini impurity of a binary node with `pos` positives out of `n`.
pub fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

/// Gains closer than this are treated as ties.
const GAIN_TIE: f64 = 1e-12;

struct Builder<'a> {
    data: &'a [(FeatureVector, Label)],
    params: TreeParams,
    // scratch: per-feature (present, present_positive) counts
    present: Vec<usize>,
    present_pos: Vec<usize>,
}

impl Builder<'_> {
    fn majority(&self, idx: &[usize]) -> Label {
        let pos = idx.iter().filter(|&&i| self.data[i].1.is_positive()).count();
        if 2 * pos >= idx.len() {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> TreeNode {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.data[i].1.is_positive()).count();
        let min_leaf = self.params.min_leaf.max(1);
        if pos == 0 || pos == n || depth >= self.params.max_depth || n < 2 * min_leaf {
            return TreeNode::Leaf {
                label: self.majority(&idx),
            };
        }

        let mut touched: Vec<u32> = Vec::new();
        for &i in &idx {
            let is_pos = self.data[i].1.is_positive();
            for &f in self.data[i].0.indices() {
                let f_us = f as usize;
                if self.present[f_us] == 0 {
                    touched.push(f);
                }
                self.present[f_us] += 1;
                if is_pos {
                    self.present_pos[f_us] += 1;
                }
            }
        }
        touched.sort_unstable();

        let parent = gini(pos, n);
        let mut best: Option<(u32, f64)> = None;
        for &f in &touched {
            let np = self.present[f as usize];
            let pp = self.present_pos[f as usize];
            let na = n - np;
            if np < min_leaf || na < min_leaf {
                continue;
            }
            let child = (np as f64 * gini(pp, np) + na as f64 * gini(pos - pp, na)) / n as f64;
            let gain = parent - child;
            if gain > GAIN_TIE && best.is_none_or(|(_, g)| gain > g + GAIN_TIE) {
                best = Some((f, gain));
            }
        }
        for &f in &touched {
            self.present[f as usize] = 0;
            self.present_pos[f as usize] = 0;
        }

        match best {
            None => TreeNode::Leaf {
                label: self.majority(&idx),
            },
            Some((feature, _)) => {
                let (with, without): (Vec<usize>, Vec<usize>) =
                    idx.into_iter().partition(|&i| self.data[i].0.contains(feature));
                let absent = Box::new(self.build(without, depth + 1));
                let present = Box::new(self.build(with, depth + 1));
                TreeNode::Split {
                    feature,
                    absent,
                    present,
                }
            }
        }
    }
}

/// Builds a tree by maximum Gini reduction; ties go to the lowest feature
/// index, leaf labels to the majority (positive on a tie).
pub fn train_tree(
    data: &[(FeatureVector, Label)],
    num_features: usize,
    params: &TreeParams,
) -> Result<TreeNode, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    if let Some(bad) = data
        .iter()
        .flat_map(|(v, _)| v.indices().last())
        .find(|&&i| i as usize >= num_features)
    {
        return Err(LearnError::FeatureOutOfRange(*bad as usize, num_features));
    }
    let mut b = Builder {
        data,
        params: *params,
        present: vec![0; num_features],
        present_pos: vec![0; num_features],
    };
    Ok(b.build((0..data.len()).collect(), 0))
}
