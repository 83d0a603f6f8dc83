use crate::error::{Error, Result};

use super::{SensitivityFunctions, SpectralAxis, Spectrum};

/// An `H×W×d` cube of non-negative samples with a per-pixel validity mask.
///
/// Samples are stored pixel-interleaved: band `i` of pixel `(x, y)` lives at
/// `(y * width + x) * d + i`. `mask[y * width + x] == false` marks a pixel
/// (e.g. a calibration target) that every operation must ignore.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralImage {
    width: usize,
    height: usize,
    axis: SpectralAxis,
    data: Vec<f64>,
    mask: Vec<bool>,
}

impl SpectralImage {
    pub fn new(
        width: usize,
        height: usize,
        axis: SpectralAxis,
        data: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let pixels = width * height;
        if data.len() != pixels * axis.count {
            return Err(Error::DimensionMismatch { expected: pixels * axis.count, got: data.len() });
        }
        if mask.len() != pixels {
            return Err(Error::DimensionMismatch { expected: pixels, got: mask.len() });
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("image sample {v} is negative or non-finite")));
        }
        Ok(SpectralImage { width, height, axis, data, mask })
    }

    /// Every pixel valid.
    pub fn unmasked(width: usize, height: usize, axis: SpectralAxis, data: Vec<f64>) -> Result<Self> {
        SpectralImage::new(width, height, axis, data, vec![true; width * height])
    }

    /// A `width × height` image where every pixel carries `spectrum`.
    pub fn constant(width: usize, height: usize, spectrum: &Spectrum) -> Self {
        let data = spectrum.values().repeat(width * height);
        SpectralImage {
            width,
            height,
            axis: *spectrum.axis(),
            data,
            mask: vec![true; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn axis(&self) -> &SpectralAxis {
        &self.axis
    }

    pub fn bands(&self) -> usize {
        self.axis.count
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn pixel(&self, index: usize) -> &[f64] {
        let d = self.axis.count;
        &self.data[index * d..(index + 1) * d]
    }

    /// Spectra of all valid pixels, in row-major order.
    pub fn valid_pixels(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data
            .chunks_exact(self.axis.count)
            .zip(&self.mask)
            .filter_map(|(px, &valid)| valid.then_some(px))
    }

    /// Multiplies every sample by `alpha` (must be ≥ 0).
    pub fn scaled(&self, alpha: f64) -> SpectralImage {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> SpectralImage {
        debug_assert_eq!(data.len(), self.data.len());
        SpectralImage { data, ..self.clone() }
    }

    #[cfg(test)]
    pub(crate) fn into_parts(self) -> (usize, usize, SpectralAxis, Vec<f64>, Vec<bool>) {
        (self.width, self.height, self.axis, self.data, self.mask)
    }
}

/// A three-channel sensor image produced by [`sensor_project`].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f64; 3]>,
    pub mask: Vec<bool>,
}

/// Renders radiance `C(λ, x) = E(λ) R(λ, x)` for a reflectance image.
pub fn relight(reflectance: &SpectralImage, illuminant: &Spectrum) -> Result<SpectralImage> {
    reflectance.axis.ensure_same(illuminant.axis())?;
    if !illuminant.is_non_negative() {
        return Err(Error::InvalidArgument("illuminant has negative values".into()));
    }
    let spd = illuminant.values();
    let data = reflectance
        .data
        .chunks_exact(spd.len())
        .flat_map(|px| px.iter().zip(spd).map(|(r, e)| e * r))
        .collect();
    Ok(reflectance.with_data(data))
}

/// Integrates radiance against camera sensitivities: `I_p = Σ_i S_p(λ_i) C(λ_i) Δλ`.
pub fn sensor_project(radiance: &SpectralImage, sens: &SensitivityFunctions) -> Result<RgbImage> {
    radiance.axis.ensure_same(&sens.axis)?;
    let data = radiance
        .data
        .chunks_exact(radiance.bands())
        .map(|px| sens.respond(px))
        .collect();
    Ok(RgbImage {
        width: radiance.width,
        height: radiance.height,
        data,
        mask: radiance.mask.clone(),
    })
}

/// Box-averages `factor × factor` blocks over valid pixels only.
///
/// An output pixel is valid iff at least one pixel of its block is valid;
/// fully masked blocks come out as zeros.
pub fn downsample(image: &SpectralImage, factor: usize) -> Result<SpectralImage> {
    if factor == 0 || !image.width.is_multiple_of(factor) || !image.height.is_multiple_of(factor) {
        return Err(Error::NonDivisibleFactor { factor, width: image.width, height: image.height });
    }
    if factor == 1 {
        return Ok(image.clone());
    }
    let d = image.bands();
    let (ow, oh) = (image.width / factor, image.height / factor);
    let mut data = vec![0.0; ow * oh * d];
    let mut mask = vec![false; ow * oh];
    let mut acc = vec![0.0; d];
    for oy in 0..oh {
        for ox in 0..ow {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let mut n = 0usize;
            for y in oy * factor..(oy + 1) * factor {
                for x in ox * factor..(ox + 1) * factor {
                    let idx = y * image.width + x;
                    if image.mask[idx] {
                        n += 1;
                        for (a, v) in acc.iter_mut().zip(image.pixel(idx)) {
                            *a += v;
                        }
                    }
                }
            }
            let out = oy * ow + ox;
            if n > 0 {
                mask[out] = true;
                for (o, a) in data[out * d..(out + 1) * d].iter_mut().zip(&acc) {
                    *o = a / n as f64;
                }
            }
        }
    }
    Ok(SpectralImage { width: ow, height: oh, axis: image.axis, data, mask })
}
