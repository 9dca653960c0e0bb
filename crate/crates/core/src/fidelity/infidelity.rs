//! Infidelity: expected squared gap between the attribution-predicted and the
//! actual effect of a perturbation.
//!
//! ```text
//! INFD = E_I[(Iᵀa − (f(x) − f(x − I)))²]
//! ```
//!
//! Each perturbation `I` sets one `patch_size` square at a uniformly random
//! position to the baseline. Unlike the correlation metrics, Infidelity
//! compares magnitudes, so it changes when attributions are rescaled.

use rand::Rng;

use super::check_inputs;
use super::perturb::{Patch, PerturbationSample, PerturbationSpec};
use crate::cart::BlackBoxModel;
use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Draws the `n_samples` random patch perturbations used by [`infidelity`].
pub fn perturbation_samples(
    model: &dyn BlackBoxModel,
    x: &Image,
    spec: &PerturbationSpec,
    n_samples: usize,
) -> Result<Vec<PerturbationSample>> {
    if spec.patch_size == 0 {
        return Err(Error::validation("patch_size must be >= 1"));
    }
    let (w, h) = (x.width(), x.height());
    let baseline = spec.baseline_values(x.len())?;
    let mut rng = spec.sampling_rng();
    let f0 = model.score(x.pixels());
    let mut pixels = x.pixels().to_vec();
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let patch = Patch {
            row: rng.random_range(0..=h.saturating_sub(spec.patch_size)),
            col: rng.random_range(0..=w.saturating_sub(spec.patch_size)),
            size: spec.patch_size,
        };
        let mask: Vec<usize> = patch.indices(w, h).collect();
        let mut delta = vec![0.0; x.len()];
        for &i in &mask {
            pixels[i] = baseline[i];
            delta[i] = x.pixels()[i] - baseline[i];
        }
        let output_drop = f0 - model.score(&pixels);
        for &i in &mask {
            pixels[i] = x.pixels()[i];
        }
        out.push(PerturbationSample {
            mask,
            delta,
            output_drop,
        });
    }
    Ok(out)
}

pub fn infidelity(
    model: &dyn BlackBoxModel,
    x: &Image,
    attributions: &[f64],
    spec: &PerturbationSpec,
    n_samples: usize,
) -> Result<f64> {
    check_inputs(model, x, attributions)?;
    if n_samples == 0 {
        return Err(Error::validation("infidelity needs at least 1 sample"));
    }
    let samples = perturbation_samples(model, x, spec, n_samples)?;
    let total: f64 = samples
        .iter()
        .map(|s| {
            let predicted: f64 = s.mask.iter().map(|&i| s.delta[i] * attributions[i]).sum();
            (predicted - s.output_drop).powi(2)
        })
        .sum();
    Ok(total / n_samples as f64)
}
