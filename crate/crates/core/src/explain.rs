//! Ground-truth local explanations of a regression tree.
//!
//! Every internal node on an instance's decision path contributes its
//! sample-weighted impurity decrease
//!
//! ```text
//! Δ(v) = (n_v·imp_v − n_left·imp_left − n_right·imp_right) / n_root
//! ```
//!
//! to the pixel it splits on. Pixels never tested on the path get zero, and a
//! pixel tested more than once accumulates. Summed over all internal nodes
//! instead of one path, the same quantity gives the usual global importances.
//!
//! Saliency values are rounded to `f32` so that an explanation kept in memory
//! is identical to one written to and read back from a PFM file.

use rand::Rng;

use crate::cart::{RegressionTree, TreeNode};
use crate::error::{Error, Result};
use crate::imagecore::SaliencyMap;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalExplanation {
    pub saliency: SaliencyMap,
    pub leaf_value: f64,
    pub path_length: usize,
}

fn impurity_decrease(tree: &RegressionTree, node: &TreeNode) -> f64 {
    let nodes = tree.nodes();
    let (l, r) = (&nodes[node.left], &nodes[node.right]);
    let weighted = node.n_samples as f64 * node.impurity
        - l.n_samples as f64 * l.impurity
        - r.n_samples as f64 * r.impurity;
    (weighted / nodes[0].n_samples as f64).max(0.0)
}

pub fn explain_instance(
    tree: &RegressionTree,
    x: &[f64],
    width: usize,
    height: usize,
) -> Result<LocalExplanation> {
    if width * height != tree.n_features() {
        return Err(Error::validation(format!(
            "{width}x{height} map for a tree with {} features",
            tree.n_features()
        )));
    }
    let path = tree.decision_path(x)?;
    let mut values = vec![0.0f64; tree.n_features()];
    for step in &path {
        values[step.feature] += impurity_decrease(tree, &tree.nodes()[step.node]);
    }
    for v in &mut values {
        *v = f64::from(*v as f32);
    }
    Ok(LocalExplanation {
        saliency: SaliencyMap::new(width, height, values)?,
        leaf_value: tree.predict(x)?,
        path_length: path.len(),
    })
}

/// Total weighted impurity decrease per feature, normalized to sum to 1.
/// A single-leaf tree yields all zeros.
pub fn global_importances(tree: &RegressionTree) -> Vec<f64> {
    let mut imp = vec![0.0; tree.n_features()];
    for node in tree.nodes() {
        if let Some(f) = node.feature {
            imp[f] += impurity_decrease(tree, node);
        }
    }
    let total: f64 = imp.iter().sum();
    if total > 0.0 {
        for v in &mut imp {
            *v /= total;
        }
    }
    imp
}

/// Outcome of perturbing zero-saliency pixels without changing any comparison
/// made on the decision path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PremiseReport {
    /// Pixels perturbed one at a time.
    pub probed: usize,
    /// Single-pixel perturbations that changed the prediction.
    pub violations: usize,
    /// Whether perturbing all probed pixels at once changed the prediction.
    pub joint_violation: bool,
}

impl PremiseReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && !self.joint_violation
    }
}

/// Moves every zero-saliency pixel to a new value in `[0, 1]` that keeps all
/// path comparisons on the same side, and checks that the prediction is
/// unchanged, both one pixel at a time and all together.
pub fn premise_check<R: Rng>(
    tree: &RegressionTree,
    x: &[f64],
    explanation: &LocalExplanation,
    rng: &mut R,
) -> Result<PremiseReport> {
    let path = tree.decision_path(x)?;
    let reference = tree.predict(x)?;
    let mut lower = vec![0.0f64; x.len()];
    let mut upper = vec![1.0f64; x.len()];
    let mut lower_open = vec![false; x.len()];
    for step in &path {
        let f = step.feature;
        if step.went_left {
            upper[f] = upper[f].min(step.threshold);
        } else if step.threshold >= lower[f] {
            lower[f] = step.threshold;
            lower_open[f] = true;
        }
    }

    let mut report = PremiseReport::default();
    let mut joint = x.to_vec();
    let mut single = x.to_vec();
    for (f, s) in explanation.saliency.values().iter().enumerate() {
        if *s != 0.0 || lower[f] >= upper[f] {
            continue;
        }
        let mut v = rng.random_range(lower[f]..=upper[f]);
        if lower_open[f] && v <= lower[f] {
            v = upper[f];
        }
        if v == x[f] {
            continue;
        }
        single[f] = v;
        report.probed += 1;
        if tree.predict(&single)? != reference {
            report.violations += 1;
        }
        single[f] = x[f];
        joint[f] = v;
    }
    report.joint_violation = tree.predict(&joint)? != reference;
    Ok(report)
}
