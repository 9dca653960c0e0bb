//! Binary PGM (`P5`, maxval 255).

use super::Image;
use crate::error::{Error, Result};

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{what} does not fit in usize")))
    }
}

pub fn read_image_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::format(0, "missing P5 magic"));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_offset = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(
            maxval_offset,
            format!("maxval {maxval} unsupported, expected 255"),
        ));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::format(cur.pos, "expected whitespace after maxval")),
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::format(2, "image dimensions overflow"))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < n {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: {} of {n} bytes", payload.len()),
        ));
    }
    let pixels = payload[..n].iter().map(|&b| f64::from(b) / 255.0).collect();
    Image::new(width, height, pixels)
}

pub fn write_image_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|p| (p * 255.0).round() as u8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reads_endpoints() {
        let img = read_image_pgm(b"P5 2 1 255\n\x00\xff").unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn linear_scaling() {
        let img = read_image_pgm(b"P5\n1 1\n255\n\x80").unwrap();
        assert!((img.pixels()[0] - 0.50196).abs() < 1e-5);
        assert_eq!(img.pixels()[0], 128.0 / 255.0);
    }

    #[test]
    fn header_comments_are_skipped() {
        let img = read_image_pgm(b"P5\n# made by hand\n1 1\n255\n\x00").unwrap();
        assert_eq!(img.len(), 1);
    }

    #[test]
    fn errors_carry_offsets() {
        match read_image_pgm(b"P5\n2 2\n255\n\x00\x01") {
            Err(Error::Format { message, .. }) => assert!(message.contains("truncated")),
            other => panic!("{other:?}"),
        }
        match read_image_pgm(b"P5\n1 1\n65535\n\x00\x00") {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(read_image_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(read_image_pgm(b"P5\nx 1\n255\n\x00").is_err());
    }

    #[test]
    fn writes_payload_bytes() {
        let one = write_image_pgm(&Image::new(1, 1, vec![1.0]).unwrap());
        assert_eq!(*one.last().unwrap(), 255);
        let zero = write_image_pgm(&Image::new(1, 1, vec![0.0]).unwrap());
        assert_eq!(*zero.last().unwrap(), 0);
    }

    #[test]
    fn round_trip_within_quantization() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
            let img = Image::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap();
            let back = read_image_pgm(&write_image_pgm(&img)).unwrap();
            let worst = img
                .pixels()
                .iter()
                .zip(back.pixels())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1.0 / 255.0, "seed {seed}: {worst}");
        }
    }
}
