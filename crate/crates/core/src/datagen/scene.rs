use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::background::{generate_background, Background};
use super::shapes::{rasterize_shape, ShapeInstance, ShapeKind};
use super::{ssin, BackgroundMode, DatasetConfig};
use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Shape inventory and background of one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneSpec {
    pub shapes: Vec<ShapeInstance>,
    pub background: Background,
}

impl SceneSpec {
    /// Number of circles, squares and crosses.
    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for s in &self.shapes {
            counts[s.kind as usize] += 1;
        }
        counts
    }

    pub fn label(&self) -> f64 {
        let [c, s, x] = self.counts();
        ssin(c, s, x)
    }

    pub fn render(&self, width: usize, height: usize) -> Result<Image> {
        let mut img = generate_background(&self.background, width, height)?;
        for shape in &self.shapes {
            rasterize_shape(shape, &mut img)?;
        }
        Ok(img)
    }

    /// Sidecar text: a `background ...` line, then `kind row col size` per shape.
    pub fn to_text(&self) -> String {
        let mut out = format!("background {}\n", self.background);
        for s in &self.shapes {
            out.push_str(&format!(
                "{} {} {} {}\n",
                s.kind, s.center_row, s.center_col, s.size
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut background = None;
        let mut shapes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("background ") {
                background = Some(Background::parse(rest)?);
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::validation(format!("scene line {}: `{line}`", lineno + 1));
            let [kind, row, col, size] = fields[..] else {
                return Err(bad());
            };
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
            shapes.push(ShapeInstance {
                kind: kind.parse()?,
                center_row: num(row)?,
                center_col: num(col)?,
                size: num(size)?,
            });
        }
        Ok(Self {
            shapes,
            background: background
                .ok_or_else(|| Error::validation("scene has no background line"))?,
        })
    }
}

pub const RESTART_AFTER: usize = 50;

/// Draws shape counts, then places each shape by rejection sampling.
///
/// Every attempt redraws both the size and the position, so crowded scenes
/// favour smaller shapes instead of failing. A shape that cannot be placed in
/// [`RESTART_AFTER`] consecutive draws discards the layout so far. The scene
/// gets `max_attempts` draws per shape in total. Bounding boxes are kept at
/// least one pixel apart so that shapes never touch.
pub fn sample_scene(config: &DatasetConfig, seed: u64) -> Result<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (config.width, config.height);
    let size_cap = config.size_max.min((w.min(h).saturating_sub(1)) / 2);
    if config.size_min > size_cap {
        return Err(Error::Generation {
            seed,
            message: format!(
                "minimum size {} does not fit a {w}x{h} image",
                config.size_min
            ),
        });
    }

    let mut kinds = Vec::new();
    for kind in ShapeKind::ALL {
        let range = config.counts[kind as usize];
        let n = rng.random_range(range.min..=range.max);
        kinds.extend(std::iter::repeat_n(kind, n));
    }

    let mut shapes: Vec<ShapeInstance> = Vec::with_capacity(kinds.len());
    let mut failures = 0;
    let mut attempts = 0;
    let budget = config.max_attempts * kinds.len();
    while shapes.len() < kinds.len() {
        if attempts == budget {
            return Err(Error::Generation {
                seed,
                message: format!(
                    "could not place {} shapes after {budget} attempts",
                    kinds.len()
                ),
            });
        }
        attempts += 1;
        let kind = kinds[shapes.len()];
        let size = rng.random_range(config.size_min..=size_cap);
        let candidate = ShapeInstance {
            kind,
            center_row: rng.random_range(size..h - size),
            center_col: rng.random_range(size..w - size),
            size,
        };
        let bb = candidate.bounding_box();
        if bb.inside(w, h) && shapes.iter().all(|s| s.bounding_box().separated_from(&bb)) {
            shapes.push(candidate);
            failures = 0;
        } else {
            failures += 1;
            if failures == RESTART_AFTER {
                shapes.clear();
                failures = 0;
            }
        }
    }

    let background = match &config.background {
        BackgroundMode::Uniform => Background::Uniform,
        BackgroundMode::Procedural => Background::Procedural { seed: rng.random() },
        BackgroundMode::Texture { files, .. } => Background::TextureFile {
            path: files[rng.random_range(0..files.len())].clone(),
        },
    };
    Ok(SceneSpec { shapes, background })
}
