use std::path::Path;

use crate::datagen::{BackgroundMode, DatasetConfig, DATASET_KEYS};
use crate::error::{Error, Result};
use crate::fidelity::{MetricParams, METRIC_KEYS};
use crate::kv::KeyValues;

pub const DEFAULT_MASTER_SEED: u64 = 20240;

/// Everything one experiment needs: dataset generation, metric parameters and
/// the master seed from which every random stream is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetConfig,
    pub metrics: MetricParams,
    pub master_seed: u64,
}

/// Built-in configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 32x32, 8 training and 2 validation images; a smoke test.
    Tiny,
    /// 64x64, 5000/500 images on black backgrounds.
    DeskExp1,
    /// As `DeskExp1` with procedural textured backgrounds.
    DeskExp2,
    /// 128x128, 50000/2000 images on black backgrounds.
    FullExp1,
    /// As `FullExp1` with procedural textured backgrounds.
    FullExp2,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Tiny,
        Preset::DeskExp1,
        Preset::DeskExp2,
        Preset::FullExp1,
        Preset::FullExp2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Tiny => "tiny",
            Preset::DeskExp1 => "exp1",
            Preset::DeskExp2 => "exp2",
            Preset::FullExp1 => "full-exp1",
            Preset::FullExp2 => "full-exp2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }

    pub fn key_values(self) -> KeyValues {
        let text = match self {
            Preset::Tiny => "width=32\nn_train=8\nn_val=2\nbackground_mode=uniform",
            Preset::DeskExp1 => "width=64\nn_train=5000\nn_val=500\nbackground_mode=uniform",
            Preset::DeskExp2 => "width=64\nn_train=5000\nn_val=500\nbackground_mode=procedural",
            Preset::FullExp1 => "width=128\nn_train=50000\nn_val=2000\nbackground_mode=uniform",
            Preset::FullExp2 => "width=128\nn_train=50000\nn_val=2000\nbackground_mode=procedural",
        };
        let mut kv = KeyValues::parse(text).expect("preset text is valid");
        kv.set("name", self.name());
        kv
    }

    pub fn config(self) -> ExperimentConfig {
        ExperimentConfig::from_kv(&self.key_values()).expect("preset is valid")
    }
}

impl ExperimentConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut known: Vec<&str> = vec!["name", "master_seed"];
        known.extend_from_slice(DATASET_KEYS);
        known.extend_from_slice(METRIC_KEYS);
        kv.reject_unknown(&known)?;
        let dataset = DatasetConfig::from_kv(kv)?;
        let metrics = MetricParams::from_kv(kv, dataset.width, dataset.height)?;
        Ok(Self {
            name: kv.get_str("name").unwrap_or("experiment").to_string(),
            master_seed: kv.get("master_seed")?.unwrap_or(DEFAULT_MASTER_SEED),
            dataset,
            metrics,
        })
    }

    /// Starts from `preset` (if any), overlays the file, then the seed.
    pub fn load(preset: Option<Preset>, file: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let mut kv = preset.map(Preset::key_values).unwrap_or_default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            kv.merge(&KeyValues::parse(&text).map_err(|e| e.in_file(path))?);
        }
        if let Some(seed) = seed {
            kv.set("master_seed", seed);
        }
        Self::from_kv(&kv)
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = self.dataset.to_kv();
        kv.merge(&self.metrics.to_kv());
        kv.set("name", &self.name);
        kv.set("master_seed", self.master_seed);
        kv
    }

    pub fn is_textured(&self) -> bool {
        !matches!(self.dataset.background, BackgroundMode::Uniform)
    }
}
