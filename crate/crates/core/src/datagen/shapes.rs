use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Intensity of every foreground pixel.
pub const FOREGROUND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    Circle,
    Square,
    Cross,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Circle, ShapeKind::Square, ShapeKind::Cross];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Square => "square",
            ShapeKind::Cross => "cross",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown shape kind `{s}`")))
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub row_min: i64,
    pub row_max: i64,
    pub col_min: i64,
    pub col_max: i64,
}

impl BoundingBox {
    /// True when the boxes share no pixel and are not edge- or corner-adjacent.
    pub fn separated_from(&self, other: &BoundingBox) -> bool {
        self.row_max + 1 < other.row_min
            || other.row_max + 1 < self.row_min
            || self.col_max + 1 < other.col_min
            || other.col_max + 1 < self.col_min
    }

    pub fn overlaps(&self, other: &BoundingBox) -> bool {
        self.row_min <= other.row_max
            && other.row_min <= self.row_max
            && self.col_min <= other.col_max
            && other.col_min <= self.col_max
    }

    pub fn inside(&self, width: usize, height: usize) -> bool {
        self.row_min >= 0
            && self.col_min >= 0
            && self.row_max < height as i64
            && self.col_max < width as i64
    }
}

/// One shape placed in a scene.
///
/// `size` is the radius of a circle, the half-side of a square and the
/// half-arm length of a cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeInstance {
    pub kind: ShapeKind,
    pub center_row: usize,
    pub center_col: usize,
    pub size: usize,
}

impl ShapeInstance {
    /// Half-thickness of each cross bar.
    pub fn cross_half_thickness(size: usize) -> usize {
        (size / 4).max(1)
    }

    fn half_extent(&self) -> usize {
        match self.kind {
            ShapeKind::Cross => self.size.max(Self::cross_half_thickness(self.size)),
            _ => self.size,
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let e = self.half_extent() as i64;
        let (r, c) = (self.center_row as i64, self.center_col as i64);
        BoundingBox {
            row_min: r - e,
            row_max: r + e,
            col_min: c - e,
            col_max: c + e,
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        let dr = row.abs_diff(self.center_row);
        let dc = col.abs_diff(self.center_col);
        match self.kind {
            ShapeKind::Circle => dr * dr + dc * dc <= self.size * self.size,
            ShapeKind::Square => dr <= self.size && dc <= self.size,
            ShapeKind::Cross => {
                let t = Self::cross_half_thickness(self.size);
                (dr <= t && dc <= self.size) || (dc <= t && dr <= self.size)
            }
        }
    }
}

/// Paints `shape` onto `canvas` at [`FOREGROUND`] intensity.
pub fn rasterize_shape(shape: &ShapeInstance, canvas: &mut Image) -> Result<()> {
    let bb = shape.bounding_box();
    if !bb.inside(canvas.width(), canvas.height()) {
        return Err(Error::Bounds(format!(
            "{} at ({}, {}) size {} does not fit a {}x{} image",
            shape.kind,
            shape.center_row,
            shape.center_col,
            shape.size,
            canvas.width(),
            canvas.height()
        )));
    }
    for row in bb.row_min as usize..=bb.row_max as usize {
        for col in bb.col_min as usize..=bb.col_max as usize {
            if shape.contains(row, col) {
                canvas.set(row, col, FOREGROUND);
            }
        }
    }
    Ok(())
}
