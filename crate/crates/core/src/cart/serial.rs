//! Tree file format.
//!
//! A JSON document with one node object per line:
//!
//! ```text
//! {"format":"cart-regression-tree","version":1,"n_features":2,"nodes":[
//! {"feature":0,"threshold":0.5,"left":1,"right":2,"value":5.0,"impurity":25.0,"n_samples":2},
//! {"feature":-1,"threshold":0.0,"left":-1,"right":-1,"value":0.0,"impurity":0.0,"n_samples":1},
//! ...
//! ]}
//! ```
//!
//! `feature = -1` marks a leaf; leaves carry `left = right = -1`. Floats are
//! written in shortest round-trip form, so a write/read cycle is bit-exact.

use serde::{Deserialize, Serialize};

use super::{RegressionTree, TreeNode};
use crate::error::{Error, Result};

const FORMAT: &str = "cart-regression-tree";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    feature: i64,
    threshold: f64,
    left: i64,
    right: i64,
    value: f64,
    impurity: f64,
    n_samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDocument {
    format: String,
    version: u32,
    n_features: usize,
    nodes: Vec<NodeRecord>,
}

pub fn serialize(tree: &RegressionTree) -> Vec<u8> {
    let mut out = format!(
        "{{\"format\":\"{FORMAT}\",\"version\":{VERSION},\"n_features\":{},\"nodes\":[\n",
        tree.n_features()
    );
    for (i, n) in tree.nodes().iter().enumerate() {
        let rec = match n.feature {
            Some(f) => NodeRecord {
                feature: f as i64,
                threshold: n.threshold,
                left: n.left as i64,
                right: n.right as i64,
                value: n.value,
                impurity: n.impurity,
                n_samples: n.n_samples,
            },
            None => NodeRecord {
                feature: -1,
                threshold: n.threshold,
                left: -1,
                right: -1,
                value: n.value,
                impurity: n.impurity,
                n_samples: n.n_samples,
            },
        };
        out.push_str(&serde_json::to_string(&rec).expect("finite node fields"));
        out.push_str(if i + 1 == tree.nodes().len() {
            "\n"
        } else {
            ",\n"
        });
    }
    out.push_str("]}\n");
    out.into_bytes()
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start: usize = bytes
        .split(|b| *b == b'\n')
        .take(line.saturating_sub(1))
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

pub fn deserialize(bytes: &[u8]) -> Result<RegressionTree> {
    let doc: TreeDocument = serde_json::from_slice(bytes)
        .map_err(|e| Error::format(byte_offset(bytes, e.line(), e.column()), e.to_string()))?;
    if doc.format != FORMAT || doc.version != VERSION {
        return Err(Error::format(
            0,
            format!("unsupported tree format {} v{}", doc.format, doc.version),
        ));
    }
    let n_nodes = doc.nodes.len();
    let child = |i: usize, c: i64| -> Result<usize> {
        usize::try_from(c)
            .ok()
            .filter(|c| *c < n_nodes)
            .ok_or_else(|| Error::format(0, format!("node {i}: child index {c} out of range")))
    };
    let mut nodes = Vec::with_capacity(n_nodes);
    for (i, rec) in doc.nodes.into_iter().enumerate() {
        let node = match rec.feature {
            -1 => {
                if rec.left != -1 || rec.right != -1 {
                    return Err(Error::format(0, format!("leaf {i} has children")));
                }
                TreeNode {
                    threshold: rec.threshold,
                    ..TreeNode::leaf(rec.value, rec.impurity, rec.n_samples)
                }
            }
            f if f >= 0 => TreeNode {
                feature: Some(f as usize),
                threshold: rec.threshold,
                left: child(i, rec.left)?,
                right: child(i, rec.right)?,
                value: rec.value,
                impurity: rec.impurity,
                n_samples: rec.n_samples,
            },
            f => return Err(Error::format(0, format!("node {i}: invalid feature {f}"))),
        };
        nodes.push(node);
    }
    RegressionTree::from_nodes(nodes, doc.n_features).map_err(|e| Error::format(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::tests::two_leaf_tree;
    use crate::cart::{train_rows, TreeParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bitwise(tree: &RegressionTree) -> Vec<[u64; 7]> {
        tree.nodes()
            .iter()
            .map(|n| {
                [
                    n.feature.map_or(u64::MAX, |f| f as u64),
                    n.threshold.to_bits(),
                    n.left as u64,
                    n.right as u64,
                    n.value.to_bits(),
                    n.impurity.to_bits(),
                    n.n_samples as u64,
                ]
            })
            .collect()
    }

    #[test]
    fn single_leaf_round_trips() {
        let tree = RegressionTree::from_nodes(vec![TreeNode::leaf(0.1 + 0.2, 0.0, 1)], 3).unwrap();
        let back = deserialize(&serialize(&tree)).unwrap();
        assert_eq!(bitwise(&back), bitwise(&tree));
        assert_eq!(back.n_features(), 3);
    }

    #[test]
    fn two_leaf_round_trips_and_predicts_alike() {
        let tree = two_leaf_tree();
        let back = deserialize(&serialize(&tree)).unwrap();
        assert_eq!(bitwise(&back), bitwise(&tree));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x = [rng.random_range(-1.0..2.0)];
            assert_eq!(tree.predict(&x).unwrap(), back.predict(&x).unwrap());
        }
    }

    #[test]
    fn trained_trees_round_trip_bit_exactly() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..3).map(|_| rng.random()).collect())
                .collect();
            let y: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
            let tree = train_rows(&rows, &y, &TreeParams::default()).unwrap();
            let bytes = serialize(&tree);
            let back = deserialize(&bytes).unwrap();
            assert_eq!(bitwise(&back), bitwise(&tree));
            assert_eq!(serialize(&back), bytes);
        }
    }

    #[test]
    fn rejects_malformed_documents() {
        let good = String::from_utf8(serialize(&two_leaf_tree())).unwrap();
        let dangling = good.replacen("\"left\":1", "\"left\":7", 1);
        assert!(matches!(
            deserialize(dangling.as_bytes()),
            Err(Error::Format { .. })
        ));
        let cycle = good.replacen("\"left\":1", "\"left\":0", 1);
        assert!(deserialize(cycle.as_bytes()).is_err());
        assert!(deserialize(b"{\"format\":\"cart-regression-tree\"").is_err());
        assert!(deserialize(b"not json").is_err());
        let wrong = good.replacen("cart-regression-tree", "other", 1);
        assert!(deserialize(wrong.as_bytes()).is_err());
        let leaf_with_child = good.replacen("\"left\":-1", "\"left\":2", 1);
        assert!(deserialize(leaf_with_child.as_bytes()).is_err());
    }
}
