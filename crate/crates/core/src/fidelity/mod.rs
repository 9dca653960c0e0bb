//! Fidelity metrics for saliency maps.
//!
//! All four metrics talk to the model only through [`BlackBoxModel::score`] and
//! take attributions as a flat row-major slice, so they accept signed
//! attributions as well as non-negative [`SaliencyMap`](crate::SaliencyMap)s.
//!
//! | metric                       | perfect value | module          |
//! |------------------------------|---------------|-----------------|
//! | Region Perturbation (AOPC)   | high          | [`region`]      |
//! | Faithfulness Correlation     | 1             | [`correlation`] |
//! | Faithfulness Estimate        | 1             | [`correlation`] |
//! | Infidelity                   | 0             | [`infidelity`]  |

pub mod correlation;
pub mod infidelity;
pub mod perturb;
pub mod region;
mod stats;

pub use correlation::{faithfulness_correlation, faithfulness_estimate};
pub use infidelity::infidelity;
pub use perturb::{
    apply_patch_baseline, Baseline, Patch, PatchGrid, PerturbationSample, PerturbationSpec,
};
pub use region::{region_perturbation, PerturbationCurve, RegionPerturbation};
pub use stats::{aggregate, pearson, Aggregate, Correlation};

use crate::cart::BlackBoxModel;
use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::kv::KeyValues;
use crate::seed::{derive_seed, Component};

/// `f(x) = w·x + b`. Its exact per-feature contribution is `w_i·x_i`, which
/// makes it the reference model for checking the metrics themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn contributions(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().zip(x).map(|(w, v)| w * v).collect()
    }
}

impl BlackBoxModel for LinearModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Returns the same value for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantModel {
    pub n_features: usize,
    pub value: f64,
}

impl BlackBoxModel for ConstantModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, _x: &[f64]) -> f64 {
        self.value
    }
}

pub(crate) fn check_inputs(
    model: &dyn BlackBoxModel,
    x: &Image,
    attributions: &[f64],
) -> Result<()> {
    if model.n_features() != x.len() || attributions.len() != x.len() {
        return Err(Error::validation(format!(
            "model expects {} features, image has {}, attributions have {}",
            model.n_features(),
            x.len(),
            attributions.len()
        )));
    }
    if let Some(i) = attributions.iter().position(|a| !a.is_finite()) {
        return Err(Error::validation(format!("attribution {i} is not finite")));
    }
    Ok(())
}

/// Which replacement value the perturbations use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Black,
    /// Mean training-set intensity.
    Mean,
    UniformNoise,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Black => "black",
            BaselineKind::Mean => "mean",
            BaselineKind::UniformNoise => "noise",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "black" => Ok(BaselineKind::Black),
            "mean" => Ok(BaselineKind::Mean),
            "noise" => Ok(BaselineKind::UniformNoise),
            _ => Err(Error::Config(format!("unknown baseline `{s}`"))),
        }
    }
}

/// Parameters of all four metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricParams {
    pub patch_size: usize,
    pub baseline: BaselineKind,
    /// Region Perturbation steps `L`.
    pub rp_steps: usize,
    pub fc_subset_size: usize,
    pub fc_runs: usize,
    pub fe_feature_budget: usize,
    pub inf_samples: usize,
}

pub const METRIC_KEYS: &[&str] = &[
    "patch_size",
    "baseline",
    "rp_steps",
    "fc_subset_size",
    "fc_runs",
    "fe_feature_budget",
    "inf_samples",
];

/// Default number of Region Perturbation steps, capped at the patch count.
pub const DEFAULT_RP_STEPS: usize = 100;

impl MetricParams {
    /// Defaults for a `width × height` image: patches of `width / 16` pixels
    /// (8 at 128 px), black baseline, correlation subsets of 1/128 of the
    /// pixels over 100 runs, 4096 estimate probes and 200 infidelity samples.
    pub fn for_resolution(width: usize, height: usize) -> Self {
        let patch_size = (width / 16).max(1);
        let patches = PatchGrid::new(width, height, patch_size).len();
        Self {
            patch_size,
            baseline: BaselineKind::Black,
            rp_steps: DEFAULT_RP_STEPS.min(patches),
            fc_subset_size: (width * height / 128).max(1),
            fc_runs: 100,
            fe_feature_budget: 4096,
            inf_samples: 200,
        }
    }

    pub fn from_kv(kv: &KeyValues, width: usize, height: usize) -> Result<Self> {
        let mut p = Self::for_resolution(width, height);
        if let Some(v) = kv.get("patch_size")? {
            p.patch_size = v;
            p.rp_steps = DEFAULT_RP_STEPS.min(PatchGrid::new(width, height, v.max(1)).len());
        }
        if let Some(v) = kv.get_str("baseline") {
            p.baseline = BaselineKind::parse(v)?;
        }
        if let Some(v) = kv.get("rp_steps")? {
            p.rp_steps = v;
        }
        if let Some(v) = kv.get("fc_subset_size")? {
            p.fc_subset_size = v;
        }
        if let Some(v) = kv.get("fc_runs")? {
            p.fc_runs = v;
        }
        if let Some(v) = kv.get("fe_feature_budget")? {
            p.fe_feature_budget = v;
        }
        if let Some(v) = kv.get("inf_samples")? {
            p.inf_samples = v;
        }
        p.validate(width, height)?;
        Ok(p)
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let n = width * height;
        let patches = PatchGrid::new(width, height, self.patch_size.max(1)).len();
        let problems = [
            (self.patch_size == 0, "patch_size must be >= 1".to_string()),
            (
                self.rp_steps > patches,
                format!("rp_steps {} exceeds {patches} patches", self.rp_steps),
            ),
            (
                self.fc_subset_size == 0 || self.fc_subset_size > n,
                format!("fc_subset_size must be in [1, {n}]"),
            ),
            (self.fc_runs < 2, "fc_runs must be >= 2".to_string()),
            (
                self.fe_feature_budget < 2,
                "fe_feature_budget must be >= 2".to_string(),
            ),
            (
                self.inf_samples == 0,
                "inf_samples must be >= 1".to_string(),
            ),
        ];
        match problems.into_iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::Config(msg)),
            None => Ok(()),
        }
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.set("patch_size", self.patch_size);
        kv.set("baseline", self.baseline.name());
        kv.set("rp_steps", self.rp_steps);
        kv.set("fc_subset_size", self.fc_subset_size);
        kv.set("fc_runs", self.fc_runs);
        kv.set("fe_feature_budget", self.fe_feature_budget);
        kv.set("inf_samples", self.inf_samples);
        kv
    }
}

/// Names used in results and summary files.
pub mod names {
    pub const REGION_PERTURBATION: &str = "region_perturbation";
    pub const REGION_PERTURBATION_NORM: &str = "region_perturbation_norm";
    pub const FAITHFULNESS_CORRELATION: &str = "faithfulness_correlation";
    pub const FAITHFULNESS_ESTIMATE: &str = "faithfulness_estimate";
    pub const INFIDELITY: &str = "infidelity";

    pub const ALL: [&str; 5] = [
        REGION_PERTURBATION,
        REGION_PERTURBATION_NORM,
        FAITHFULNESS_CORRELATION,
        FAITHFULNESS_ESTIMATE,
        INFIDELITY,
    ];
}

/// One metric's value on one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricScore {
    pub metric: &'static str,
    pub score: f64,
    pub degenerate: bool,
}

/// Runs every metric on one image.
///
/// Each metric draws from its own stream keyed by `(master_seed, metric,
/// image_index)`, which makes the scores independent of evaluation order.
pub fn evaluate_image(
    model: &dyn BlackBoxModel,
    x: &Image,
    attributions: &[f64],
    params: &MetricParams,
    baseline_mean: f64,
    master_seed: u64,
    image_index: u64,
) -> Result<Vec<MetricScore>> {
    let spec = |component| {
        let seed = derive_seed(master_seed, component, image_index);
        PerturbationSpec {
            patch_size: params.patch_size,
            baseline: match params.baseline {
                BaselineKind::Black => Baseline::Black,
                BaselineKind::Mean => Baseline::Mean(baseline_mean),
                BaselineKind::UniformNoise => Baseline::UniformNoise,
            },
            rng_seed: seed,
        }
    };
    let rp = region_perturbation(
        model,
        x,
        attributions,
        &spec(Component::RegionPerturbation),
        params.rp_steps,
    )?;
    let fc = faithfulness_correlation(
        model,
        x,
        attributions,
        &spec(Component::FaithfulnessCorrelation),
        params.fc_subset_size,
        params.fc_runs,
    )?;
    let fe = faithfulness_estimate(
        model,
        x,
        attributions,
        &spec(Component::FaithfulnessEstimate),
        params.fe_feature_budget,
    )?;
    let inf = infidelity(
        model,
        x,
        attributions,
        &spec(Component::Infidelity),
        params.inf_samples,
    )?;
    Ok(vec![
        MetricScore {
            metric: names::REGION_PERTURBATION,
            score: rp.aopc,
            degenerate: false,
        },
        MetricScore {
            metric: names::REGION_PERTURBATION_NORM,
            score: rp.aopc_norm,
            degenerate: rp.norm_degenerate,
        },
        MetricScore {
            metric: names::FAITHFULNESS_CORRELATION,
            score: fc.value,
            degenerate: fc.degenerate,
        },
        MetricScore {
            metric: names::FAITHFULNESS_ESTIMATE,
            score: fe.value,
            degenerate: fe.degenerate,
        },
        MetricScore {
            metric: names::INFIDELITY,
            score: inf,
            degenerate: false,
        },
    ])
}

/// Per-image scores of one metric plus their aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub metric: String,
    pub per_image: Vec<(u64, f64)>,
    pub summary: Aggregate,
    pub degenerate: usize,
}

impl MetricResult {
    pub fn new(
        metric: impl Into<String>,
        per_image: Vec<(u64, f64)>,
        degenerate: usize,
    ) -> Result<Self> {
        let scores: Vec<f64> = per_image.iter().map(|(_, s)| *s).collect();
        Ok(Self {
            metric: metric.into(),
            summary: aggregate(&scores)?,
            per_image,
            degenerate,
        })
    }
}
