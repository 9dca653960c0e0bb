//! Region Perturbation: the area over the MoRF perturbation curve.
//!
//! The image is tiled into `patch_size` squares, patches are ranked by their
//! summed attribution (most relevant first, ties by patch index), and the top
//! `L` patches are replaced by the baseline one after another:
//!
//! ```text
//! AOPC = 1/(L+1) · Σ_{k=0..L} (f(x⁰) − f(xᵏ))
//! ```
//!
//! AOPC is reported raw and divided by `|f(x⁰) − f(xᴸ)|`.

use super::check_inputs;
use super::perturb::{overwrite, PatchGrid, PerturbationSpec};
use crate::cart::BlackBoxModel;
use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Floor of the normalizer `|f(x⁰) − f(xᴸ)|`.
pub const NORM_EPSILON: f64 = 1e-12;

/// Model output after `k` cumulative perturbation steps, `k = 0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationCurve {
    pub steps: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPerturbation {
    pub curve: PerturbationCurve,
    /// Patch indices in perturbation order.
    pub order: Vec<usize>,
    pub aopc: f64,
    /// `aopc / |f(x⁰) − f(xᴸ)|`, or 0 when the normalizer is degenerate.
    pub aopc_norm: f64,
    /// `|f(x⁰) − f(xᴸ)|` fell below [`NORM_EPSILON`].
    pub norm_degenerate: bool,
}

/// Patch indices sorted by descending summed attribution, ties by index.
pub fn morf_order(grid: &PatchGrid, attributions: &[f64]) -> Vec<usize> {
    let relevance: Vec<f64> = (0..grid.len())
        .map(|p| {
            grid.patch(p)
                .indices(grid.width, grid.height)
                .map(|i| attributions[i])
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| relevance[b].total_cmp(&relevance[a]).then(a.cmp(&b)));
    order
}

pub fn region_perturbation(
    model: &dyn BlackBoxModel,
    x: &Image,
    attributions: &[f64],
    spec: &PerturbationSpec,
    n_steps: usize,
) -> Result<RegionPerturbation> {
    check_inputs(model, x, attributions)?;
    if spec.patch_size == 0 {
        return Err(Error::validation("patch_size must be >= 1"));
    }
    let grid = PatchGrid::new(x.width(), x.height(), spec.patch_size);
    if n_steps > grid.len() {
        return Err(Error::validation(format!(
            "{n_steps} steps requested but only {} patches exist",
            grid.len()
        )));
    }
    let order = morf_order(&grid, attributions);
    let baseline = spec.baseline_values(x.len())?;
    let mut pixels = x.pixels().to_vec();
    let mut steps = Vec::with_capacity(n_steps + 1);
    steps.push((0, model.score(&pixels)));
    for (k, &p) in order.iter().take(n_steps).enumerate() {
        overwrite(
            &mut pixels,
            &baseline,
            grid.patch(p).indices(x.width(), x.height()),
        );
        steps.push((k + 1, model.score(&pixels)));
    }
    let f0 = steps[0].1;
    let aopc = steps.iter().map(|(_, f)| f0 - f).sum::<f64>() / (n_steps + 1) as f64;
    let span = (f0 - steps[n_steps].1).abs();
    let norm_degenerate = span < NORM_EPSILON;
    Ok(RegionPerturbation {
        curve: PerturbationCurve { steps },
        order,
        aopc,
        aopc_norm: if norm_degenerate { 0.0 } else { aopc / span },
        norm_degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::LinearModel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sum_model(n: usize) -> LinearModel {
        LinearModel {
            weights: vec![1.0; n],
            bias: 0.0,
        }
    }

    /// AOPC of an explicit 1x1-patch ordering, computed from scratch.
    fn aopc_for_order(model: &LinearModel, x: &[f64], order: &[usize]) -> f64 {
        use crate::BlackBoxModel;
        let f0 = model.score(x);
        let mut y = x.to_vec();
        let mut total = 0.0;
        for &i in order {
            y[i] = 0.0;
            total += f0 - model.score(&y);
        }
        total / (order.len() + 1) as f64
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn hand_computed_curve() {
        let x = Image::new(2, 2, vec![4.0 / 4.0, 3.0 / 4.0, 2.0 / 4.0, 1.0 / 4.0]).unwrap();
        // Scale by 4 so the output matches the integer example 10, 6, 3, 1, 0.
        let model = LinearModel {
            weights: vec![4.0; 4],
            bias: 0.0,
        };
        let rp =
            region_perturbation(&model, &x, x.pixels(), &PerturbationSpec::black(1, 0), 4).unwrap();
        let scores: Vec<f64> = rp.curve.steps.iter().map(|s| s.1).collect();
        assert_eq!(scores, vec![10.0, 6.0, 3.0, 1.0, 0.0]);
        assert!((rp.aopc - 6.0).abs() < 1e-12);
        assert!((rp.aopc_norm - 0.6).abs() < 1e-12);
        assert_eq!(rp.order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn zero_attributions_fall_back_to_patch_index() {
        let x = Image::filled(4, 4, 0.5).unwrap();
        let rp = region_perturbation(
            &sum_model(16),
            &x,
            &[0.0; 16],
            &PerturbationSpec::black(2, 0),
            4,
        )
        .unwrap();
        assert_eq!(rp.order, vec![0, 1, 2, 3]);
        assert!(rp.aopc.is_finite());
        assert_eq!(rp.curve.steps.len(), 5);
    }

    #[test]
    fn morf_beats_every_ordering_exhaustively() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..4).map(|_| rng.random()).collect();
            let model = LinearModel {
                weights: (0..4).map(|_| rng.random_range(-2.0..2.0)).collect(),
                bias: 0.3,
            };
            let img = Image::new(2, 2, x.clone()).unwrap();
            let attr = model.contributions(&x);
            let rp = region_perturbation(&model, &img, &attr, &PerturbationSpec::black(1, 0), 4)
                .unwrap();
            let all = permutations(4);
            assert_eq!(all.len(), 24);
            for perm in all {
                assert!(rp.aopc >= aopc_for_order(&model, &x, &perm) - 1e-12);
            }
            assert!((rp.aopc - aopc_for_order(&model, &x, &rp.order)).abs() < 1e-12);
        }
    }

    #[test]
    fn positive_rescaling_keeps_aopc() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Image::new(6, 6, (0..36).map(|_| rng.random()).collect()).unwrap();
        let model = LinearModel {
            weights: (0..36).map(|_| rng.random_range(-1.0..1.0)).collect(),
            bias: 0.0,
        };
        let attr: Vec<f64> = (0..36).map(|_| rng.random()).collect();
        let scaled: Vec<f64> = attr.iter().map(|a| a * 3.5).collect();
        let spec = PerturbationSpec::black(2, 0);
        let a = region_perturbation(&model, &x, &attr, &spec, 9).unwrap();
        let b = region_perturbation(&model, &x, &scaled, &spec, 9).unwrap();
        assert_eq!(a.aopc, b.aopc);
        assert_eq!(a.order, b.order);
    }

    #[test]
    fn constant_model_normalizer_is_flagged() {
        let x = Image::filled(2, 2, 1.0).unwrap();
        let model = crate::fidelity::ConstantModel {
            n_features: 4,
            value: 0.3,
        };
        let rp =
            region_perturbation(&model, &x, &[1.0; 4], &PerturbationSpec::black(1, 0), 2).unwrap();
        assert_eq!(rp.aopc, 0.0);
        assert!(rp.norm_degenerate);
    }

    #[test]
    fn curve_returning_to_start_scores_zero_normalized() {
        let x = Image::filled(2, 1, 1.0).unwrap();
        let model = crate::fidelity::LinearModel {
            weights: vec![1.0, -1.0],
            bias: 0.0,
        };
        let rp = region_perturbation(&model, &x, &[1.0, 0.0], &PerturbationSpec::black(1, 0), 2)
            .unwrap();
        assert!((rp.aopc - 1.0 / 3.0).abs() < 1e-15);
        assert!(rp.norm_degenerate);
        assert_eq!(rp.aopc_norm, 0.0);
    }

    #[test]
    fn too_many_steps_is_rejected() {
        let x = Image::filled(4, 4, 1.0).unwrap();
        let err = region_perturbation(
            &sum_model(16),
            &x,
            &[0.0; 16],
            &PerturbationSpec::black(2, 0),
            5,
        );
        assert!(err.is_err());
        assert!(region_perturbation(
            &sum_model(9),
            &x,
            &[0.0; 16],
            &PerturbationSpec::black(2, 0),
            1
        )
        .is_err());
    }
}
