//! Spectral Gray World.

use crate::cbc::argmax_first;
use crate::error::{Error, Result};
use crate::illuminant::IlluminantSet;
use crate::spectral::{SpectralImage, Spectrum, CHROMA_EPSILON};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayWorldEstimate {
    pub index: usize,
    pub name: String,
    /// L2-normalized mean radiance spectrum.
    pub mean: Spectrum,
    pub cosine: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Mean radiance over valid, non-black pixels, snapped to the candidate with
/// the highest cosine similarity (lowest index on ties).
pub fn spectral_gray_world(radiance: &SpectralImage, candidates: &IlluminantSet) -> Result<GrayWorldEstimate> {
    if radiance.axis() != candidates.axis() {
        return Err(Error::AxisMismatch { left: *radiance.axis(), right: *candidates.axis() });
    }
    let mut sum = vec![0.0; radiance.bands()];
    let mut n = 0usize;
    for px in radiance.valid_pixels() {
        if px.iter().sum::<f64>() < CHROMA_EPSILON {
            continue;
        }
        sum.iter_mut().zip(px).for_each(|(s, v)| *s += v);
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mean: Vec<f64> = sum.iter().map(|v| v / norm).collect();
    let scores: Vec<f64> = candidates.members().iter().map(|m| cosine(&mean, m.spd().values())).collect();
    let index = argmax_first(&scores);
    Ok(GrayWorldEstimate {
        index,
        name: candidates.members()[index].name.clone(),
        mean: Spectrum::new(*radiance.axis(), mean)?,
        cosine: scores[index],
    })
}
