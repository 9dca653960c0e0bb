use rayon::prelude::*;

use super::{RegressionTree, TreeNode};
use crate::error::{Error, Result};

/// Growth limits. The defaults grow the tree until every leaf is pure or
/// holds identical feature rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            min_impurity_decrease: 0.0,
        }
    }
}

/// Column-major `n_samples × n_features` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_samples: usize,
    n_features: usize,
    columns: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_features = rows.first().map_or(0, |r| r.as_ref().len());
        let mut columns = vec![0.0; rows.len() * n_features];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(Error::validation(format!(
                    "row {i} has {} features, expected {n_features}",
                    row.len()
                )));
            }
            for (f, v) in row.iter().enumerate() {
                columns[f * rows.len() + i] = *v;
            }
        }
        Ok(Self {
            n_samples: rows.len(),
            n_features,
            columns,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature * self.n_samples..(feature + 1) * self.n_samples]
    }

    pub fn row(&self, sample: usize) -> Vec<f64> {
        (0..self.n_features)
            .map(|f| self.columns[f * self.n_samples + sample])
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    /// Number of samples routed left.
    n_left: usize,
    threshold: f64,
    /// `sum_l² / n_l + sum_r² / n_r`; larger means lower squared error.
    proxy: f64,
}

struct Grower<'a> {
    x: &'a FeatureMatrix,
    y: &'a [f64],
    params: TreeParams,
    /// For each feature, sample indices sorted by that feature. Every open node
    /// owns the same `[start, end)` range in all features.
    order: Vec<u32>,
    go_left: Vec<bool>,
}

/// Greedy depth-first CART growth on squared error.
///
/// Every feature is scanned at every node; thresholds are midpoints between
/// consecutive distinct values. Ties in split quality go to the lowest feature
/// index and then the lowest threshold.
pub fn train(
    features: &FeatureMatrix,
    targets: &[f64],
    params: &TreeParams,
) -> Result<RegressionTree> {
    let (n, d) = (features.n_samples(), features.n_features());
    if n == 0 || d == 0 {
        return Err(Error::validation(format!(
            "cannot train on a {n}x{d} matrix"
        )));
    }
    if targets.len() != n {
        return Err(Error::validation(format!(
            "{} targets for {n} samples",
            targets.len()
        )));
    }
    if n > u32::MAX as usize {
        return Err(Error::validation("too many samples"));
    }
    if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
        return Err(Error::validation(format!("target {i} is not finite")));
    }
    if let Some(i) = features.columns.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!(
            "feature {} of sample {} is not finite",
            i / n,
            i % n
        )));
    }
    if params.min_samples_leaf == 0 || params.min_samples_split < 2 {
        return Err(Error::validation(
            "min_samples_leaf >= 1 and min_samples_split >= 2 required",
        ));
    }

    let mut order = vec![0u32; n * d];
    order.par_chunks_mut(n).enumerate().for_each(|(f, chunk)| {
        let col = features.column(f);
        for (i, slot) in chunk.iter_mut().enumerate() {
            *slot = i as u32;
        }
        chunk.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
    });

    let mut grower = Grower {
        x: features,
        y: targets,
        params: *params,
        order,
        go_left: vec![false; n],
    };
    let nodes = grower.grow();
    RegressionTree::from_nodes(nodes, d)
}

/// Convenience wrapper over row-major data.
pub fn train_rows<R: AsRef<[f64]>>(
    rows: &[R],
    targets: &[f64],
    params: &TreeParams,
) -> Result<RegressionTree> {
    train(&FeatureMatrix::from_rows(rows)?, targets, params)
}

impl Grower<'_> {
    fn n(&self) -> usize {
        self.x.n_samples()
    }

    fn segment(&self, feature: usize, start: usize, end: usize) -> &[u32] {
        let base = feature * self.n();
        &self.order[base + start..base + end]
    }

    fn grow(&mut self) -> Vec<TreeNode> {
        let n = self.n();
        let mut nodes = vec![TreeNode::leaf(0.0, 0.0, n)];
        // (node index, start, end, depth)
        let mut stack = vec![(0usize, 0usize, n, 0usize)];
        while let Some((id, start, end, depth)) = stack.pop() {
            let (value, impurity, pure) = self.node_stats(start, end);
            let count = end - start;
            nodes[id] = TreeNode::leaf(value, impurity, count);

            let p = &self.params;
            if pure
                || count < p.min_samples_split
                || count < 2 * p.min_samples_leaf
                || p.max_depth.is_some_and(|m| depth >= m)
            {
                continue;
            }
            let Some(best) = self.best_split(start, end) else {
                continue;
            };
            if p.min_impurity_decrease > 0.0 {
                let total: f64 = self
                    .segment(0, start, end)
                    .iter()
                    .map(|&i| self.y[i as usize])
                    .sum();
                let sse_before = impurity * count as f64;
                let sse_after = total * total / count as f64 - best.proxy + sse_before;
                let decrease = (sse_before - sse_after.max(0.0)) / n as f64;
                if decrease < p.min_impurity_decrease {
                    continue;
                }
            }

            self.partition(best.feature, start, end, best.n_left);
            let (left, right) = (nodes.len(), nodes.len() + 1);
            nodes.push(TreeNode::leaf(0.0, 0.0, best.n_left));
            nodes.push(TreeNode::leaf(0.0, 0.0, count - best.n_left));
            let node = &mut nodes[id];
            node.feature = Some(best.feature);
            node.threshold = best.threshold;
            node.left = left;
            node.right = right;
            let mid = start + best.n_left;
            stack.push((right, mid, end, depth + 1));
            stack.push((left, start, mid, depth + 1));
        }
        nodes
    }

    /// Mean (or the shared target of a pure node), population variance, purity.
    fn node_stats(&self, start: usize, end: usize) -> (f64, f64, bool) {
        let samples = self.segment(0, start, end);
        let first = self.y[samples[0] as usize];
        if samples.iter().all(|&i| self.y[i as usize] == first) {
            return (first, 0.0, true);
        }
        let count = samples.len() as f64;
        let mean = samples.iter().map(|&i| self.y[i as usize]).sum::<f64>() / count;
        let var = samples
            .iter()
            .map(|&i| (self.y[i as usize] - mean).powi(2))
            .sum::<f64>()
            / count;
        (mean, var, false)
    }

    fn best_for_feature(
        &self,
        feature: usize,
        start: usize,
        end: usize,
        total: f64,
    ) -> Option<Candidate> {
        let seg = self.segment(feature, start, end);
        let col = self.x.column(feature);
        let n = seg.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<Candidate> = None;
        let mut sum_left = 0.0;
        for i in 1..n {
            sum_left += self.y[seg[i - 1] as usize];
            if i < min_leaf || n - i < min_leaf {
                continue;
            }
            let (a, b) = (col[seg[i - 1] as usize], col[seg[i] as usize]);
            if b <= a {
                continue;
            }
            let sum_right = total - sum_left;
            let proxy = sum_left * sum_left / i as f64 + sum_right * sum_right / (n - i) as f64;
            if best.is_none_or(|c| proxy > c.proxy) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature,
                    n_left: i,
                    threshold,
                    proxy,
                });
            }
        }
        best
    }

    fn best_split(&self, start: usize, end: usize) -> Option<Candidate> {
        let total: f64 = self
            .segment(0, start, end)
            .iter()
            .map(|&i| self.y[i as usize])
            .sum();
        let d = self.x.n_features();
        let per_feature: Vec<Option<Candidate>> = if (end - start) * d < 1 << 16 {
            (0..d)
                .map(|f| self.best_for_feature(f, start, end, total))
                .collect()
        } else {
            (0..d)
                .into_par_iter()
                .map(|f| self.best_for_feature(f, start, end, total))
                .collect()
        };
        // Sequential reduction in feature order keeps the tie-break stable.
        per_feature
            .into_iter()
            .flatten()
            .fold(None, |best: Option<Candidate>, c| match best {
                Some(b) if b.proxy >= c.proxy => Some(b),
                _ => Some(c),
            })
    }

    /// Stable partition of every feature's segment into left and right samples.
    fn partition(&mut self, feature: usize, start: usize, end: usize, n_left: usize) {
        let n = self.n();
        let base = feature * n;
        for &s in &self.order[base + start..base + start + n_left] {
            self.go_left[s as usize] = true;
        }
        for &s in &self.order[base + start + n_left..base + end] {
            self.go_left[s as usize] = false;
        }
        let go_left = &self.go_left;
        let split = |buf: &mut Vec<u32>, chunk: &mut [u32]| {
            let seg = &mut chunk[start..end];
            buf.clear();
            let mut write = 0;
            for read in 0..seg.len() {
                let s = seg[read];
                if go_left[s as usize] {
                    seg[write] = s;
                    write += 1;
                } else {
                    buf.push(s);
                }
            }
            seg[write..].copy_from_slice(buf);
        };
        if (end - start) * self.x.n_features() < 1 << 16 {
            let mut buf = Vec::new();
            for chunk in self.order.chunks_mut(n) {
                split(&mut buf, chunk);
            }
        } else {
            self.order
                .par_chunks_mut(n)
                .for_each_init(Vec::new, |buf, chunk| split(buf, chunk));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| f64::from(rng.random_range(0..levels)) / f64::from(levels))
                    .collect()
            })
            .collect()
    }

    /// Every split examined by brute force: all features, all midpoints.
    fn brute_force_best(rows: &[Vec<f64>], y: &[f64]) -> Option<(usize, f64, f64)> {
        let d = rows[0].len();
        let sse = |idx: &[usize]| {
            if idx.is_empty() {
                return 0.0;
            }
            let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
            idx.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>()
        };
        let mut best: Option<(usize, f64, f64)> = None;
        for f in 0..d {
            let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) =
                    (0..rows.len()).partition(|&i| rows[i][f] <= t);
                let cost = sse(&l) + sse(&r);
                if best.is_none_or(|b| cost < b.2 - 1e-9) {
                    best = Some((f, t, cost));
                }
            }
        }
        best
    }

    #[test]
    fn single_sample_is_a_leaf() {
        let tree = train_rows(&[vec![0.3, 0.2]], &[4.0], &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.nodes()[0].value, 4.0);
        assert_eq!(tree.nodes()[0].impurity, 0.0);
    }

    #[test]
    fn two_point_split_enumerated() {
        let tree = train_rows(
            &[vec![0.0], vec![1.0]],
            &[0.0, 10.0],
            &TreeParams::default(),
        )
        .unwrap();
        let root = tree.nodes()[0];
        assert_eq!(root.feature, Some(0));
        assert_eq!(root.threshold, 0.5);
        assert_eq!(root.impurity, 25.0);
        assert_eq!(tree.nodes()[root.left].value, 0.0);
        assert_eq!(tree.nodes()[root.right].value, 10.0);
    }

    #[test]
    fn root_split_matches_brute_force() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = random_rows(&mut rng, 40, 5, 7);
            let y: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
            let tree = train_rows(&rows, &y, &TreeParams::default()).unwrap();
            let (f, t, _) = brute_force_best(&rows, &y).unwrap();
            let root = tree.nodes()[0];
            assert_eq!(root.feature, Some(f), "seed {seed}");
            assert_eq!(root.threshold, t, "seed {seed}");
        }
    }

    #[test]
    fn ties_go_to_lowest_feature_then_threshold() {
        // Features 1 and 2 separate the targets equally well; feature 0 is noise.
        let rows = vec![
            vec![0.5, 0.0, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.5, 1.0, 1.0],
            vec![0.5, 1.0, 1.0],
        ];
        let tree = train_rows(&rows, &[1.0, 1.0, 3.0, 3.0], &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes()[0].feature, Some(1));
        // Two equally good thresholds on one feature: the lower one wins.
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let tree = train_rows(&rows, &[0.0, 1.0, 0.0], &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes()[0].threshold, 0.5);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = TreeParams::default();
        assert!(train_rows::<Vec<f64>>(&[], &[], &p).is_err());
        assert!(train_rows(&[vec![f64::NAN]], &[1.0], &p).is_err());
        assert!(train_rows(&[vec![1.0]], &[f64::INFINITY], &p).is_err());
        assert!(train_rows(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 2.0], &p).is_err());
        assert!(train_rows(&[vec![1.0]], &[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn identical_rows_with_conflicting_targets_stay_a_leaf() {
        let tree =
            train_rows(&[vec![0.2], vec![0.2]], &[0.0, 1.0], &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.nodes()[0].value, 0.5);
        assert_eq!(tree.nodes()[0].impurity, 0.25);
    }

    #[test]
    fn max_depth_limits_growth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = random_rows(&mut rng, 200, 4, 50);
        let y: Vec<f64> = (0..200).map(|_| rng.random()).collect();
        let params = TreeParams {
            max_depth: Some(3),
            ..TreeParams::default()
        };
        assert!(train_rows(&rows, &y, &params).unwrap().depth() <= 3);
    }

    #[test]
    fn parallel_and_sequential_paths_agree() {
        // Large enough to take the rayon path at the root.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = random_rows(&mut rng, 2000, 40, 9);
        let y: Vec<f64> = (0..2000)
            .map(|_| f64::from(rng.random_range(0..5u8)))
            .collect();
        let a = train_rows(&rows, &y, &TreeParams::default()).unwrap();
        let b = train_rows(&rows, &y, &TreeParams::default()).unwrap();
        assert_eq!(a, b);
    }

    fn check_tree_invariants(rows: &[Vec<f64>], y: &[f64], tree: &RegressionTree) {
        // Exact fit on distinct rows.
        for (row, t) in rows.iter().zip(y) {
            assert_eq!(tree.predict(row).unwrap(), *t);
        }
        // Variance reduction never negative.
        for node in tree.nodes() {
            if node.feature.is_some() {
                let (l, r) = (tree.nodes()[node.left], tree.nodes()[node.right]);
                let parent = node.impurity * node.n_samples as f64;
                let children = l.impurity * l.n_samples as f64 + r.impurity * r.n_samples as f64;
                assert!(children <= parent + 1e-9 * parent.max(1.0));
                assert_eq!(l.n_samples + r.n_samples, node.n_samples);
            }
        }
        // Leaf value is the mean of the training targets routed there.
        let mut routed: Vec<Vec<f64>> = vec![Vec::new(); tree.nodes().len()];
        for (row, t) in rows.iter().zip(y) {
            routed[tree.apply(row).unwrap()].push(*t);
        }
        for (i, targets) in routed.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let mean = targets.iter().sum::<f64>() / targets.len() as f64;
            assert!((tree.nodes()[i].value - mean).abs() < 1e-12);
            assert_eq!(tree.nodes()[i].n_samples, targets.len());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn distinct_rows_fit_exactly(seed in any::<u64>(), n in 2usize..120, d in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = random_rows(&mut rng, n, d, 4);
            rows.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
            rows.dedup();
            let y: Vec<f64> = rows.iter().map(|_| f64::from(rng.random_range(0..9u8)) / 8.0 - 0.5).collect();
            let tree = train_rows(&rows, &y, &TreeParams::default()).unwrap();
            check_tree_invariants(&rows, &y, &tree);
        }
    }
}
