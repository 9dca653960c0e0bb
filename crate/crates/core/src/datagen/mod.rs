//! Synthetic shape datasets.
//!
//! Each image holds a random number of circles, squares and crosses drawn in
//! white on either a black background or a texture capped at
//! [`TEXTURE_MAX`]. The regression target is [`ssin`] of the three counts.
//!
//! On disk a dataset is laid out as
//!
//! ```text
//! images/000000.pgm     binary PGM
//! scenes/000000.txt     background line + one `kind row col size` line per shape
//! manifest.csv          filename,label,n_circles,n_squares,n_crosses,split
//! config.txt            generation parameters and master_seed
//! ```

mod background;
mod scene;
mod shapes;

pub use background::{generate_background, list_textures, Background, TEXTURE_MAX};
pub use scene::{sample_scene, SceneSpec};
pub use shapes::{rasterize_shape, BoundingBox, ShapeInstance, ShapeKind, FOREGROUND};

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{read_image_pgm, write_image_pgm, Image};
use crate::kv::KeyValues;
use crate::seed::{derive_seed, Component};

/// `1/2 sin(π/2 n_c) + 1/4 sin(π/2 n_s) + 1/6 sin(π/2 n_x)`.
///
/// The sine is evaluated on the count modulo 4, so every label is an exact
/// combination of 0 and ±1 terms.
pub fn ssin(n_circles: usize, n_squares: usize, n_crosses: usize) -> f64 {
    fn quarter_sine(n: usize) -> f64 {
        match n % 4 {
            0 | 2 => 0.0,
            1 => 1.0,
            _ => -1.0,
        }
    }
    0.5 * quarter_sine(n_circles) + 0.25 * quarter_sine(n_squares) + quarter_sine(n_crosses) / 6.0
}

/// `ssin` evaluated literally with floating-point sines.
pub fn ssin_float(n_circles: usize, n_squares: usize, n_crosses: usize) -> f64 {
    let s = |n: usize| (FRAC_PI_2 * n as f64).sin();
    0.5 * s(n_circles) + 0.25 * s(n_squares) + s(n_crosses) / 6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackgroundMode {
    Uniform,
    Procedural,
    Texture { dir: PathBuf, files: Vec<PathBuf> },
}

impl BackgroundMode {
    pub fn name(&self) -> &'static str {
        match self {
            BackgroundMode::Uniform => "uniform",
            BackgroundMode::Procedural => "procedural",
            BackgroundMode::Texture { .. } => "texture",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub width: usize,
    pub height: usize,
    pub n_train: usize,
    pub n_val: usize,
    /// Indexed by `ShapeKind as usize`.
    pub counts: [CountRange; 3],
    pub size_min: usize,
    pub size_max: usize,
    pub background: BackgroundMode,
    pub max_attempts: usize,
}

pub const DATASET_KEYS: &[&str] = &[
    "width",
    "height",
    "n_train",
    "n_val",
    "count_min",
    "count_max",
    "count_min_circle",
    "count_max_circle",
    "count_min_square",
    "count_max_square",
    "count_min_cross",
    "count_max_cross",
    "size_min",
    "size_max",
    "background_mode",
    "texture_dir",
    "max_attempts",
];

impl Default for DatasetConfig {
    fn default() -> Self {
        Self::for_resolution(128, 128)
    }
}

impl DatasetConfig {
    /// Full-size split, counts on `[0, 3]`, and sizes `[8, 24]` scaled from a
    /// 128-pixel reference to the smaller image side.
    pub fn for_resolution(width: usize, height: usize) -> Self {
        let side = width.min(height);
        let size_min = (8 * side / 128).max(1);
        let size_max = (24 * side / 128).max(size_min);
        Self {
            width,
            height,
            n_train: 50_000,
            n_val: 2_000,
            counts: [CountRange { min: 0, max: 3 }; 3],
            size_min,
            size_max,
            background: BackgroundMode::Uniform,
            max_attempts: 1000,
        }
    }

    pub fn n_images(&self) -> usize {
        self.n_train + self.n_val
    }

    pub fn n_features(&self) -> usize {
        self.width * self.height
    }

    pub fn split_of(&self, index: usize) -> Split {
        if index < self.n_train {
            Split::Train
        } else {
            Split::Validation
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("image dimensions must be positive".into()));
        }
        if self.size_min == 0 || self.size_min > self.size_max {
            return Err(Error::Config(format!(
                "size range [{}, {}] is invalid",
                self.size_min, self.size_max
            )));
        }
        if let Some(kind) = ShapeKind::ALL
            .into_iter()
            .find(|k| self.counts[*k as usize].min > self.counts[*k as usize].max)
        {
            return Err(Error::Config(format!("{kind} count range is empty")));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be positive".into()));
        }
        Ok(())
    }

    /// Reads the dataset keys of `kv`; keys that are absent keep their defaults.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let width = kv.get("width")?.unwrap_or(128);
        let height = kv.get("height")?.unwrap_or(width);
        let mut c = Self::for_resolution(width, height);
        if let Some(v) = kv.get("n_train")? {
            c.n_train = v;
        }
        if let Some(v) = kv.get("n_val")? {
            c.n_val = v;
        }
        for kind in ShapeKind::ALL {
            let range = &mut c.counts[kind as usize];
            if let Some(v) = kv.get("count_min")? {
                range.min = v;
            }
            if let Some(v) = kv.get("count_max")? {
                range.max = v;
            }
            if let Some(v) = kv.get(&format!("count_min_{kind}"))? {
                range.min = v;
            }
            if let Some(v) = kv.get(&format!("count_max_{kind}"))? {
                range.max = v;
            }
        }
        if let Some(v) = kv.get("size_min")? {
            c.size_min = v;
        }
        if let Some(v) = kv.get("size_max")? {
            c.size_max = v;
        }
        if let Some(v) = kv.get("max_attempts")? {
            c.max_attempts = v;
        }
        c.background = match kv.get_str("background_mode").unwrap_or("uniform") {
            "uniform" => BackgroundMode::Uniform,
            "procedural" => BackgroundMode::Procedural,
            "texture" => {
                let dir = PathBuf::from(kv.get_str("texture_dir").ok_or_else(|| {
                    Error::Config("background_mode=texture requires texture_dir".into())
                })?);
                let files = list_textures(&dir)?;
                BackgroundMode::Texture { dir, files }
            }
            other => return Err(Error::Config(format!("unknown background_mode `{other}`"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.set("width", self.width);
        kv.set("height", self.height);
        kv.set("n_train", self.n_train);
        kv.set("n_val", self.n_val);
        for kind in ShapeKind::ALL {
            let r = self.counts[kind as usize];
            kv.set(&format!("count_min_{kind}"), r.min);
            kv.set(&format!("count_max_{kind}"), r.max);
        }
        kv.set("size_min", self.size_min);
        kv.set("size_max", self.size_max);
        kv.set("max_attempts", self.max_attempts);
        kv.set("background_mode", self.background.name());
        if let BackgroundMode::Texture { dir, .. } = &self.background {
            kv.set("texture_dir", dir.display());
        }
        kv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub image: Image,
    pub label: f64,
    pub scene: SceneSpec,
}

/// Scene and pixels of image `index`, independent of every other image.
pub fn generate_image(
    config: &DatasetConfig,
    master_seed: u64,
    index: usize,
) -> Result<LabeledImage> {
    let seed = derive_seed(master_seed, Component::Scene, index as u64);
    let scene = sample_scene(config, seed)?;
    let image = scene.render(config.width, config.height)?;
    Ok(LabeledImage {
        image,
        label: scene.label(),
        scene,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub filename: String,
    pub label: f64,
    pub n_circles: usize,
    pub n_squares: usize,
    pub n_crosses: usize,
    pub split: Split,
}

impl ManifestRecord {
    /// Image index parsed from `images/NNNNNN.pgm`.
    pub fn index(&self) -> Option<usize> {
        Path::new(&self.filename)
            .file_stem()?
            .to_str()?
            .parse()
            .ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
    /// Generation parameters plus `master_seed`.
    pub config: KeyValues,
}

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const CONFIG_FILE: &str = "config.txt";

pub fn image_filename(index: usize) -> String {
    format!("images/{index:06}.pgm")
}

pub fn scene_filename(index: usize) -> String {
    format!("scenes/{index:06}.txt")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn generate_dataset(
    config: &DatasetConfig,
    master_seed: u64,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    config.validate()?;
    for sub in ["images", "scenes"] {
        let dir = out_dir.join(sub);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let records = (0..config.n_images())
        .into_par_iter()
        .map(|index| {
            let item = generate_image(config, master_seed, index)?;
            let filename = image_filename(index);
            write_file(&out_dir.join(&filename), &write_image_pgm(&item.image))?;
            write_file(
                &out_dir.join(scene_filename(index)),
                item.scene.to_text().as_bytes(),
            )?;
            let [n_circles, n_squares, n_crosses] = item.scene.counts();
            Ok(ManifestRecord {
                filename,
                label: item.label,
                n_circles,
                n_squares,
                n_crosses,
                split: config.split_of(index),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut echo = config.to_kv();
    echo.set("master_seed", master_seed);
    let manifest = DatasetManifest {
        records,
        config: echo,
    };
    manifest.write(out_dir)?;
    Ok(manifest)
}

impl DatasetManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        for r in &self.records {
            w.serialize(r).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        write_file(&dir.join(CONFIG_FILE), self.config.to_text().as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let mut r = csv::Reader::from_path(&path).map_err(|e| csv_error(&path, e))?;
        let records = r
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestRecord>, _>>()
            .map_err(|e| csv_error(&path, e))?;
        let config_path = dir.join(CONFIG_FILE);
        let config = match std::fs::read_to_string(&config_path) {
            Ok(text) => KeyValues::parse(&text).map_err(|e| e.in_file(&config_path))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => KeyValues::default(),
            Err(e) => return Err(Error::io(&config_path, e)),
        };
        Ok(Self { records, config })
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::File {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Loads the image a manifest record points at.
pub fn load_image(data_dir: &Path, record: &ManifestRecord) -> Result<Image> {
    let path = data_dir.join(&record.filename);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    read_image_pgm(&bytes).map_err(|e| e.in_file(&path))
}
