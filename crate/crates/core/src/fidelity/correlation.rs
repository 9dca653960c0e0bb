//! Faithfulness Correlation and Faithfulness Estimate.
//!
//! Both correlate the attribution mass that was removed with the drop in model
//! output it caused. Correlation removes random feature subsets; Estimate
//! removes one feature at a time, never accumulating perturbations.

use rand::seq::index;

use super::check_inputs;
use super::perturb::PerturbationSpec;
use super::stats::{pearson, Correlation};
use crate::cart::BlackBoxModel;
use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Pearson correlation, over `n_runs` random subsets `S` of `subset_size`
/// features, between `Σ_{i∈S} a_i` and `f(x) − f(x with S at baseline)`.
pub fn faithfulness_correlation(
    model: &dyn BlackBoxModel,
    x: &Image,
    attributions: &[f64],
    spec: &PerturbationSpec,
    subset_size: usize,
    n_runs: usize,
) -> Result<Correlation> {
    check_inputs(model, x, attributions)?;
    let n = x.len();
    if subset_size == 0 || subset_size > n {
        return Err(Error::validation(format!(
            "subset size {subset_size} not in [1, {n}]"
        )));
    }
    if n_runs < 2 {
        return Err(Error::validation(
            "faithfulness correlation needs at least 2 runs",
        ));
    }
    let baseline = spec.baseline_values(n)?;
    let mut rng = spec.sampling_rng();
    let mut pixels = x.pixels().to_vec();
    let f0 = model.score(&pixels);
    let mut removed = Vec::with_capacity(n_runs);
    let mut drops = Vec::with_capacity(n_runs);
    for _ in 0..n_runs {
        let subset = index::sample(&mut rng, n, subset_size);
        let mut mass = 0.0;
        for i in subset.iter() {
            pixels[i] = baseline[i];
            mass += attributions[i];
        }
        drops.push(f0 - model.score(&pixels));
        removed.push(mass);
        for i in subset.iter() {
            pixels[i] = x.pixels()[i];
        }
    }
    pearson(&removed, &drops)
}

/// Pearson correlation between `a_i` and `f(x) − f(x with only i at baseline)`
/// over all features, or over a seeded sample of `feature_budget` features on
/// larger inputs.
pub fn faithfulness_estimate(
    model: &dyn BlackBoxModel,
    x: &Image,
    attributions: &[f64],
    spec: &PerturbationSpec,
    feature_budget: usize,
) -> Result<Correlation> {
    check_inputs(model, x, attributions)?;
    if feature_budget < 2 {
        return Err(Error::validation(
            "faithfulness estimate needs a budget of at least 2",
        ));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::validation(
            "faithfulness estimate needs at least 2 features",
        ));
    }
    let probes: Vec<usize> = if n <= feature_budget {
        (0..n).collect()
    } else {
        let mut picked = index::sample(&mut spec.sampling_rng(), n, feature_budget).into_vec();
        picked.sort_unstable();
        picked
    };
    let baseline = spec.baseline_values(n)?;
    let mut pixels = x.pixels().to_vec();
    let f0 = model.score(&pixels);
    let mut drops = Vec::with_capacity(probes.len());
    for &i in &probes {
        pixels[i] = baseline[i];
        drops.push(f0 - model.score(&pixels));
        pixels[i] = x.pixels()[i];
    }
    let probed: Vec<f64> = probes.iter().map(|&i| attributions[i]).collect();
    pearson(&probed, &drops)
}
