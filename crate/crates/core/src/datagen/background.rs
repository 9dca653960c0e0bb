use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imagecore::{read_image_pgm, Image};

/// Upper bound of textured background intensities; shapes are drawn at 1.0.
pub const TEXTURE_MAX: f64 = 0.75;

/// Background of one scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Background {
    Uniform,
    Procedural { seed: u64 },
    TextureFile { path: PathBuf },
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Background::Uniform => write!(f, "uniform"),
            Background::Procedural { seed } => write!(f, "procedural {seed}"),
            Background::TextureFile { path } => write!(f, "texture {}", path.display()),
        }
    }
}

impl Background {
    pub fn parse(s: &str) -> Result<Self> {
        let (mode, arg) = s.split_once(' ').unwrap_or((s, ""));
        match mode {
            "uniform" if arg.is_empty() => Ok(Background::Uniform),
            "procedural" => arg
                .trim()
                .parse()
                .map(|seed| Background::Procedural { seed })
                .map_err(|_| Error::validation(format!("bad procedural seed `{arg}`"))),
            "texture" if !arg.is_empty() => Ok(Background::TextureFile {
                path: PathBuf::from(arg),
            }),
            _ => Err(Error::validation(format!("unknown background `{s}`"))),
        }
    }
}

pub fn generate_background(mode: &Background, width: usize, height: usize) -> Result<Image> {
    match mode {
        Background::Uniform => Image::filled(width, height, 0.0),
        Background::Procedural { seed } => Ok(value_noise(*seed, width, height)),
        Background::TextureFile { path } => texture_from_file(path, width, height),
    }
}

/// Fractal value noise with octaves from a quarter of the image down to a few
/// pixels, stretched like a texture file into `[0, TEXTURE_MAX]`.
fn value_noise(seed: u64, width: usize, height: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = width.max(height).max(1);
    let mut pixels = vec![0.0; width * height];
    let mut weight = 1.0;
    for divisor in [4, 8, 16, 32] {
        let cell = (extent / divisor).max(1);
        let lattice_w = width / cell + 2;
        let lattice_h = height / cell + 2;
        let lattice: Vec<f64> = (0..lattice_w * lattice_h).map(|_| rng.random()).collect();
        let at = |r: usize, c: usize| lattice[r * lattice_w + c];
        for row in 0..height {
            let (r0, fr) = (row / cell, smoothstep((row % cell) as f64 / cell as f64));
            for col in 0..width {
                let (c0, fc) = (col / cell, smoothstep((col % cell) as f64 / cell as f64));
                let top = at(r0, c0) * (1.0 - fc) + at(r0, c0 + 1) * fc;
                let bottom = at(r0 + 1, c0) * (1.0 - fc) + at(r0 + 1, c0 + 1) * fc;
                pixels[row * width + col] += weight * (top * (1.0 - fr) + bottom * fr);
            }
        }
        weight *= 0.5;
    }
    stretch(&mut pixels);
    Image::new(width, height, pixels).expect("noise stays in range")
}

/// Linear min/max stretch into `[0, TEXTURE_MAX]`; constant input maps to 0.
fn stretch(pixels: &mut [f64]) {
    let lo = pixels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for p in pixels {
        *p = if span > 0.0 {
            ((*p - lo) / span * TEXTURE_MAX).clamp(0.0, TEXTURE_MAX)
        } else {
            0.0
        };
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn load_grayscale(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        return read_image_pgm(&bytes).map_err(|e| e.in_file(path));
    }
    let decoded = image::load_from_memory(&bytes).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = decoded.to_luma8();
    let (w, h) = (luma.width() as usize, luma.height() as usize);
    Image::new(
        w,
        h,
        luma.into_raw()
            .into_iter()
            .map(|b| f64::from(b) / 255.0)
            .collect(),
    )
}

/// Nearest-neighbour resize followed by a linear min/max stretch into
/// `[0, TEXTURE_MAX]`. Constant textures map to 0.
fn texture_from_file(path: &Path, width: usize, height: usize) -> Result<Image> {
    let src = load_grayscale(path)?;
    if src.is_empty() {
        return Err(Error::File {
            path: path.to_path_buf(),
            message: "empty texture".into(),
        });
    }
    let mut pixels = Vec::with_capacity(width * height);
    for row in 0..height {
        let sr = row * src.height() / height;
        for col in 0..width {
            pixels.push(src.get(sr, col * src.width() / width));
        }
    }
    stretch(&mut pixels);
    Image::new(width, height, pixels)
}

/// Image files in `dir`, sorted by name.
pub fn list_textures(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("pgm" | "png" | "jpg" | "jpeg")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::File {
            path: dir.to_path_buf(),
            message: "no .pgm/.png/.jpg textures found".into(),
        });
    }
    Ok(files)
}
