//! CART regression tree.
//!
//! Nodes live in a flat array with the root at index 0. A sample goes left when
//! `x[feature] <= threshold`. Node impurity is the population variance of the
//! training targets that reached the node.

mod serial;
mod train;

pub use serial::{deserialize, serialize};
pub use train::{train, train_rows, FeatureMatrix, TreeParams};

use crate::error::{Error, Result};

/// Scoring function the fidelity metrics are allowed to query.
///
/// Implementations must be deterministic and free of observable side effects.
pub trait BlackBoxModel: Sync {
    fn n_features(&self) -> usize;

    /// Model output for a flat feature vector of length [`n_features`](Self::n_features).
    fn score(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    /// `None` for leaves.
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub value: f64,
    pub impurity: f64,
    pub n_samples: usize,
}

impl TreeNode {
    pub fn leaf(value: f64, impurity: f64, n_samples: usize) -> Self {
        Self {
            feature: None,
            threshold: 0.0,
            left: 0,
            right: 0,
            value,
            impurity,
            n_samples,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature.is_none()
    }
}

/// One internal node visited on the way to a leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStep {
    pub node: usize,
    pub feature: usize,
    pub threshold: f64,
    pub went_left: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
    n_features: usize,
}

impl RegressionTree {
    /// Builds a tree after checking that `nodes` form a proper binary tree
    /// rooted at 0 whose split features are below `n_features`.
    pub fn from_nodes(nodes: Vec<TreeNode>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::validation("tree has no nodes"));
        }
        let mut parent_seen = vec![false; nodes.len()];
        parent_seen[0] = true;
        for (i, node) in nodes.iter().enumerate() {
            if node.n_samples == 0 {
                return Err(Error::validation(format!("node {i} has zero samples")));
            }
            if node.impurity.is_nan() || node.impurity < 0.0 || !node.value.is_finite() {
                return Err(Error::validation(format!(
                    "node {i} has invalid value/impurity"
                )));
            }
            let Some(feature) = node.feature else {
                continue;
            };
            if feature >= n_features {
                return Err(Error::validation(format!(
                    "node {i} splits on feature {feature} of {n_features}"
                )));
            }
            if node.threshold.is_nan() {
                return Err(Error::validation(format!("node {i} has NaN threshold")));
            }
            for child in [node.left, node.right] {
                if child >= nodes.len() {
                    return Err(Error::validation(format!(
                        "node {i} has dangling child {child}"
                    )));
                }
                if child == 0 || parent_seen[child] {
                    return Err(Error::validation(format!(
                        "node {child} has more than one parent (cycle)"
                    )));
                }
                parent_seen[child] = true;
            }
        }
        if let Some(orphan) = parent_seen.iter().position(|p| !p) {
            return Err(Error::validation(format!("node {orphan} is unreachable")));
        }
        Ok(Self { nodes, n_features })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        // Children always have larger indices than their parent in trained
        // trees, but deserialized ones need not, so walk explicitly.
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            max = max.max(depth[i]);
            let n = &self.nodes[i];
            if !n.is_leaf() {
                for c in [n.left, n.right] {
                    depth[c] = depth[i] + 1;
                    stack.push(c);
                }
            }
        }
        max
    }

    fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::validation(format!(
                "feature vector has {} entries, tree expects {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(())
    }

    fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let Some(f) = self.nodes[i].feature {
            let n = &self.nodes[i];
            i = if x[f] <= n.threshold { n.left } else { n.right };
        }
        i
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_dims(x)?;
        Ok(self.nodes[self.leaf_index(x)].value)
    }

    /// Index of the leaf `x` lands in.
    pub fn apply(&self, x: &[f64]) -> Result<usize> {
        self.check_dims(x)?;
        Ok(self.leaf_index(x))
    }

    pub fn decision_path(&self, x: &[f64]) -> Result<Vec<PathStep>> {
        self.check_dims(x)?;
        let mut path = Vec::new();
        let mut i = 0;
        while let Some(feature) = self.nodes[i].feature {
            let n = &self.nodes[i];
            let went_left = x[feature] <= n.threshold;
            path.push(PathStep {
                node: i,
                feature,
                threshold: n.threshold,
                went_left,
            });
            i = if went_left { n.left } else { n.right };
        }
        Ok(path)
    }
}

impl BlackBoxModel for RegressionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_features, "feature vector length");
        self.nodes[self.leaf_index(x)].value
    }
}

/// Mean absolute and mean squared error.
pub fn evaluate_regression(predictions: &[f64], truths: &[f64]) -> Result<(f64, f64)> {
    if predictions.len() != truths.len() {
        return Err(Error::validation(format!(
            "{} predictions for {} targets",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::validation("no predictions to evaluate"));
    }
    let n = predictions.len() as f64;
    let (abs, sq) = predictions
        .iter()
        .zip(truths)
        .fold((0.0, 0.0), |(a, s), (p, t)| {
            let d = t - p;
            (a + d.abs(), s + d * d)
        });
    Ok((abs / n, sq / n))
}
