//! Grayscale PFM (`Pf`) for saliency maps.
//!
//! Values are stored as 32-bit floats, bottom row first, as the format
//! requires. A negative scale marks little-endian data; this writer always
//! emits `-1.0`. Values in memory are widened from `f32`, so a map that was read
//! from disk (or produced by the explainer) survives a write/read cycle bit for
//! bit.

use super::SaliencyMap;
use crate::error::{Error, Result};

pub fn write_saliency_pfm(map: &SaliencyMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for row in (0..h).rev() {
        for v in &map.values()[row * w..(row + 1) * w] {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize, what: &str) -> Result<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format(start, format!("expected {what}")));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .map_err(|_| Error::format(start, format!("{what} is not ASCII")))
}

pub fn read_saliency_pfm(bytes: &[u8]) -> Result<SaliencyMap> {
    if bytes.len() < 2 || &bytes[..2] != b"Pf" {
        return Err(Error::format(0, "missing Pf magic"));
    }
    let mut pos = 2;
    let mut dim = |what: &str| -> Result<usize> {
        let start = pos;
        header_token(bytes, &mut pos, what)?
            .parse()
            .map_err(|_| Error::format(start, format!("invalid {what}")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let scale_start = pos;
    let scale: f64 = header_token(bytes, &mut pos, "scale")?
        .parse()
        .map_err(|_| Error::format(scale_start, "invalid scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(
            scale_start,
            "scale must be nonzero and finite",
        ));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(pos, "expected whitespace after scale")),
    }
    let little_endian = scale < 0.0;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::format(2, "map dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() < 4 * n {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: {} of {} bytes", payload.len(), 4 * n),
        ));
    }
    let mut values = vec![0.0f64; n];
    for (k, chunk) in payload[..4 * n].chunks_exact(4).enumerate() {
        let raw: [u8; 4] = chunk.try_into().expect("chunk of 4");
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        if !v.is_finite() {
            return Err(Error::format(pos + 4 * k, format!("non-finite value {v}")));
        }
        if v < 0.0 {
            return Err(Error::format(pos + 4 * k, format!("negative saliency {v}")));
        }
        let (file_row, col) = (k / width, k % width);
        values[(height - 1 - file_row) * width + col] = f64::from(v);
    }
    SaliencyMap::new(width, height, values)
}
