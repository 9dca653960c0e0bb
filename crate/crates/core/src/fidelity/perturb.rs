//! Shared perturbation machinery: baselines, patches and the patch grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Replacement value written into perturbed pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    Black,
    /// A fixed intensity, typically the dataset mean.
    Mean(f64),
    /// Independent uniform `[0, 1]` noise per pixel, drawn from `rng_seed`.
    UniformNoise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    /// Side of the square patches.
    pub patch_size: usize,
    pub baseline: Baseline,
    pub rng_seed: u64,
}

const NOISE_STREAM: u64 = 0;
const SAMPLING_STREAM: u64 = 1;

impl PerturbationSpec {
    pub fn black(patch_size: usize, rng_seed: u64) -> Self {
        Self {
            patch_size,
            baseline: Baseline::Black,
            rng_seed,
        }
    }

    /// Replacement value for every pixel of an `n`-pixel image.
    pub fn baseline_values(&self, n: usize) -> Result<Vec<f64>> {
        match self.baseline {
            Baseline::Black => Ok(vec![0.0; n]),
            Baseline::Mean(m) if (0.0..=1.0).contains(&m) => Ok(vec![m; n]),
            Baseline::Mean(m) => Err(Error::validation(format!(
                "baseline mean {m} outside [0, 1]"
            ))),
            Baseline::UniformNoise => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
                rng.set_stream(NOISE_STREAM);
                Ok((0..n).map(|_| rng.random::<f64>()).collect())
            }
        }
    }

    /// Generator for the metric's own random choices (subsets, positions),
    /// independent of the noise baseline stream.
    pub fn sampling_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(SAMPLING_STREAM);
        rng
    }
}

/// Square patch by top-left corner. It may extend past the image; only the
/// intersection is perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Patch {
    pub row: usize,
    pub col: usize,
    pub size: usize,
}

impl Patch {
    /// Feature indices of the patch clipped to a `width × height` image.
    pub fn indices(&self, width: usize, height: usize) -> impl Iterator<Item = usize> {
        let rows = self.row.min(height)..(self.row + self.size).min(height);
        let cols = self.col.min(width)..(self.col + self.size).min(width);
        rows.flat_map(move |r| cols.clone().map(move |c| r * width + c))
    }
}

/// Non-overlapping patches anchored at `(0, 0)`, row-major; the last row and
/// column of patches are clipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGrid {
    pub width: usize,
    pub height: usize,
    pub patch_size: usize,
}

impl PatchGrid {
    pub fn new(width: usize, height: usize, patch_size: usize) -> Self {
        Self {
            width,
            height,
            patch_size,
        }
    }

    pub fn cols(&self) -> usize {
        self.width.div_ceil(self.patch_size)
    }

    pub fn rows(&self) -> usize {
        self.height.div_ceil(self.patch_size)
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn patch(&self, index: usize) -> Patch {
        let (r, c) = (index / self.cols(), index % self.cols());
        Patch {
            row: r * self.patch_size,
            col: c * self.patch_size,
            size: self.patch_size,
        }
    }
}

/// Copies `baseline` into `pixels` at `indices`.
pub(crate) fn overwrite(
    pixels: &mut [f64],
    baseline: &[f64],
    indices: impl IntoIterator<Item = usize>,
) {
    for i in indices {
        pixels[i] = baseline[i];
    }
}

pub fn apply_patch_baseline(x: &Image, patch: Patch, spec: &PerturbationSpec) -> Result<Image> {
    if patch.size == 0 || patch.row >= x.height() || patch.col >= x.width() {
        return Err(Error::validation(format!(
            "patch {patch:?} does not intersect the {}x{} image",
            x.width(),
            x.height()
        )));
    }
    let baseline = spec.baseline_values(x.len())?;
    let mut pixels = x.pixels().to_vec();
    overwrite(&mut pixels, &baseline, patch.indices(x.width(), x.height()));
    Image::new(x.width(), x.height(), pixels)
}

/// One random perturbation: the changed features, the difference
/// `I = x − x_perturbed`, and the model's output drop `f(x) − f(x − I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSample {
    pub mask: Vec<usize>,
    pub delta: Vec<f64>,
    pub output_drop: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_patch_on_white_image() {
        let x = Image::filled(4, 4, 1.0).unwrap();
        let spec = PerturbationSpec::black(2, 0);
        let y = apply_patch_baseline(
            &x,
            Patch {
                row: 1,
                col: 1,
                size: 2,
            },
            &spec,
        )
        .unwrap();
        assert_eq!(y.pixels().iter().filter(|p| **p == 0.0).count(), 4);
        assert_eq!(y.get(1, 1), 0.0);
        assert_eq!(y.get(0, 0), 1.0);
    }

    #[test]
    fn whole_image_patch() {
        let x = Image::filled(3, 5, 0.6).unwrap();
        let y = apply_patch_baseline(
            &x,
            Patch {
                row: 0,
                col: 0,
                size: 8,
            },
            &PerturbationSpec::black(8, 0),
        )
        .unwrap();
        assert!(y.pixels().iter().all(|p| *p == 0.0));
    }

    #[test]
    fn outside_pixels_are_bit_identical() {
        let x = Image::new(3, 3, (0..9).map(|i| i as f64 / 9.0).collect()).unwrap();
        let spec = PerturbationSpec {
            patch_size: 2,
            baseline: Baseline::Mean(0.5),
            rng_seed: 0,
        };
        let y = apply_patch_baseline(
            &x,
            Patch {
                row: 2,
                col: 2,
                size: 2,
            },
            &spec,
        )
        .unwrap();
        for i in 0..8 {
            assert_eq!(x.pixels()[i].to_bits(), y.pixels()[i].to_bits());
        }
        assert_eq!(y.pixels()[8], 0.5);
    }

    #[test]
    fn noise_baseline_is_reproducible() {
        let x = Image::filled(8, 8, 0.0).unwrap();
        let spec = PerturbationSpec {
            patch_size: 4,
            baseline: Baseline::UniformNoise,
            rng_seed: 99,
        };
        let p = Patch {
            row: 2,
            col: 3,
            size: 4,
        };
        let a = apply_patch_baseline(&x, p, &spec).unwrap();
        let b = apply_patch_baseline(&x, p, &spec).unwrap();
        let bits = |i: &Image| i.pixels().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert!(a.pixels().iter().any(|v| *v > 0.0));
        let other = PerturbationSpec {
            rng_seed: 100,
            ..spec
        };
        assert_ne!(
            bits(&a),
            bits(&apply_patch_baseline(&x, p, &other).unwrap())
        );
    }

    #[test]
    fn empty_intersection_is_rejected() {
        let x = Image::filled(4, 4, 1.0).unwrap();
        let spec = PerturbationSpec::black(2, 0);
        assert!(apply_patch_baseline(
            &x,
            Patch {
                row: 4,
                col: 0,
                size: 2
            },
            &spec
        )
        .is_err());
        assert!(apply_patch_baseline(
            &x,
            Patch {
                row: 0,
                col: 0,
                size: 0
            },
            &spec
        )
        .is_err());
    }

    #[test]
    fn grid_clips_edges() {
        let g = PatchGrid::new(10, 7, 4);
        assert_eq!((g.rows(), g.cols(), g.len()), (2, 3, 6));
        let last = g.patch(5);
        assert_eq!((last.row, last.col), (4, 8));
        assert_eq!(last.indices(10, 7).count(), 3 * 2);
        let total: usize = (0..g.len())
            .map(|i| g.patch(i).indices(10, 7).count())
            .sum();
        assert_eq!(total, 70);
    }
}
