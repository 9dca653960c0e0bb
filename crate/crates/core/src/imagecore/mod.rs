//! Grayscale images and saliency maps.
//!
//! Both are row-major grids. Pixel `(row, col)` of a `width`-wide grid lives at
//! feature index `row * width + col`; the same order is used by the dataset
//! generator, the regression tree and the explanations.

mod pfm;
mod pgm;

pub use pfm::{read_saliency_pfm, write_saliency_pfm};
pub use pgm::{read_image_pgm, write_image_pgm};

use crate::error::{Error, Result};

/// Row-major feature index of pixel `(row, col)`.
pub fn flatten_index(row: usize, col: usize, width: usize, height: usize) -> Result<usize> {
    if row >= height || col >= width {
        return Err(Error::Index(format!(
            "pixel ({row}, {col}) outside {width}x{height} grid"
        )));
    }
    Ok(row * width + col)
}

/// Inverse of [`flatten_index`].
pub fn unflatten_index(index: usize, width: usize, height: usize) -> Result<(usize, usize)> {
    if width == 0 || index >= width * height {
        return Err(Error::Index(format!(
            "feature {index} outside {width}x{height} grid"
        )));
    }
    Ok((index / width, index % width))
}

/// Grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::validation(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some((i, p)) = pixels
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::validation(format!(
                "pixel {i} has intensity {p}, expected [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// The flat feature vector.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Sets a pixel, clamping the value into `[0, 1]`.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value.clamp(0.0, 1.0);
    }
}

/// Non-negative per-pixel importance map.
///
/// An all-zero map is valid and means no feature was used.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::validation(format!(
                "{} saliency values for a {width}x{height} map",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::validation(format!(
                "saliency {i} is {v}, expected a finite non-negative value"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Feature indices with nonzero importance, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Multiplies every value by `factor` (must be finite and non-negative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten_index(0, 0, 128, 128).unwrap(), 0);
        assert_eq!(flatten_index(1, 0, 128, 128).unwrap(), 128);
        assert_eq!(flatten_index(2, 3, 4, 4).unwrap(), 11);
        assert!(matches!(flatten_index(4, 0, 4, 4), Err(Error::Index(_))));
        assert!(matches!(flatten_index(0, 4, 4, 4), Err(Error::Index(_))));
        assert!(unflatten_index(16, 4, 4).is_err());
    }

    #[test]
    fn flatten_is_bijective_on_8x8() {
        let mut seen = [false; 64];
        for row in 0..8 {
            for col in 0..8 {
                let i = flatten_index(row, col, 8, 8).unwrap();
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(unflatten_index(i, 8, 8).unwrap(), (row, col));
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn image_rejects_bad_pixels() {
        assert!(Image::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image::new(1, 1, vec![1.5]).is_err());
        assert!(Image::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn saliency_rejects_negative_and_allows_zero() {
        assert!(SaliencyMap::new(1, 2, vec![0.0, -0.1]).is_err());
        let z = SaliencyMap::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(z.support().is_empty());
    }
}
