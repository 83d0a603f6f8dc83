use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angle between two non-negative spectra in degrees.
///
/// Uses `2·atan2(‖â − b̂‖, ‖â + b̂‖)`, which stays exact near 0° where the
/// arccos of a rounded cosine would not.
pub fn angular_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: estimate.len() });
    }
    let na = estimate.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(na > 0.0 && nb > 0.0) || !na.is_finite() || !nb.is_finite() {
        return Err(Error::InvalidArgument("angular error needs non-zero finite vectors".into()));
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in estimate.iter().zip(truth) {
        let (a, b) = (a / na, b / nb);
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).to_degrees())
}

/// Error-distribution statistics in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub trimean: f64,
    pub best25: f64,
    pub worst25: f64,
    pub n: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Mean, median, Tukey trimean, and the means of the lowest and highest
/// `⌈n/4⌉` errors.
pub fn summarize(errors: &[f64]) -> Result<Summary> {
    if errors.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty error list".into()));
    }
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("error list contains non-finite values".into()));
    }
    let n = errors.len();
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = errors.iter().sum::<f64>() / n as f64;
    let (q1, q2, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
    let quarter = n.div_ceil(4);
    let tail_mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    Ok(Summary {
        mean,
        median: q2,
        trimean: (q1 + 2.0 * q2 + q3) / 4.0,
        best25: tail_mean(&sorted[..quarter]),
        worst25: tail_mean(&sorted[n - quarter..]),
        n,
    })
}
