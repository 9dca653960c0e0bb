use crate::error::{Error, Result};

/// Pearson correlation, or `0.0` flagged as degenerate when either input has
/// zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<Correlation> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "pearson on {} vs {} values",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::validation("pearson needs at least 2 values"));
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if constant(a) || constant(b) {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    let denom = (va * vb).sqrt();
    if !denom.is_finite() || denom <= 0.0 {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        value: (cov / denom).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// Mean, population standard deviation and range of a set of scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Single-pass (Welford) aggregation.
pub fn aggregate(scores: &[f64]) -> Result<Aggregate> {
    if scores.is_empty() {
        return Err(Error::validation("cannot aggregate zero scores"));
    }
    let (mut mean, mut m2) = (0.0, 0.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, &s) in scores.iter().enumerate() {
        let delta = s - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (s - mean);
        min = min.min(s);
        max = max.max(s);
    }
    Ok(Aggregate {
        mean,
        std: (m2 / scores.len() as f64).max(0.0).sqrt(),
        min,
        max,
        n: scores.len(),
    })
}
