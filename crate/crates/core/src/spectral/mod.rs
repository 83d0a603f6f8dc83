//! Wavelength-gridded spectral data, image formation and pixel-level primitives.
//!
//! Images store samples pixel-interleaved (`H×W×d`) alongside a validity mask;
//! every pixel operation skips masked pixels.

mod axis;
mod image;
pub mod io;
mod noise;
mod sensitivity;

pub use axis::{SpectralAxis, Spectrum};
pub use image::{downsample, relight, sensor_project, RgbImage, SpectralImage};
pub use noise::{add_noise, noise_sigma, noise_stream_seed, CLEAN_SNR};
pub use sensitivity::SensitivityFunctions;

/// Pixels whose L1 norm falls below this are skipped everywhere.
pub const CHROMA_EPSILON: f64 = 1e-12;

/// L1-normalizes a non-negative sample vector.
///
/// Returns `None` for (near-)black pixels so callers can drop them.
pub fn l1_chromaticity(p: &[f64]) -> Option<Vec<f64>> {
    let norm: f64 = p.iter().map(|v| v.abs()).sum();
    if !(norm >= CHROMA_EPSILON) {
        return None;
    }
    Some(p.iter().map(|v| v / norm).collect())
}

/// In-place variant of [`l1_chromaticity`]; returns `false` and leaves `p`
/// untouched when the pixel must be skipped.
pub fn l1_normalize_in_place(p: &mut [f64]) -> bool {
    let norm: f64 = p.iter().map(|v| v.abs()).sum();
    if !(norm >= CHROMA_EPSILON) {
        return false;
    }
    p.iter_mut().for_each(|v| *v /= norm);
    true
}
