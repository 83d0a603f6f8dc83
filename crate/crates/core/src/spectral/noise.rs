use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::SpectralImage;

/// SNR sentinel meaning "no noise".
pub const CLEAN_SNR: f64 = f64::INFINITY;

/// `σ = μ / 10^(SNR_dB / 20)`.
pub fn noise_sigma(mean_signal: f64, snr_db: f64) -> f64 {
    mean_signal / 10f64.powf(snr_db / 20.0)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent noise stream for one (image, illuminant) pair.
///
/// `splitmix64(splitmix64(master ^ splitmix64(image)) ^ splitmix64(illuminant + 2^32))`.
pub fn noise_stream_seed(master: u64, image: u64, illuminant: u64) -> u64 {
    let a = splitmix64(master ^ splitmix64(image));
    splitmix64(a ^ splitmix64(illuminant.wrapping_add(1 << 32)))
}

/// Adds zero-mean Gaussian noise at the requested SNR to every valid sample,
/// clipping results at zero. `μ` is the mean over all valid pixels and bands.
pub fn add_noise(radiance: &SpectralImage, snr_db: f64, seed: u64) -> Result<SpectralImage> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!("bad SNR {snr_db} dB")));
    }
    let valid = radiance.valid_count();
    if valid == 0 {
        return Err(Error::NoValidPixels);
    }
    if snr_db == CLEAN_SNR {
        return Ok(radiance.clone());
    }
    let sum: f64 = radiance.valid_pixels().flat_map(|px| px.iter()).sum();
    let mean = sum / (valid * radiance.bands()) as f64;
    let sigma = noise_sigma(mean, snr_db);
    if sigma == 0.0 {
        return Ok(radiance.clone());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = radiance.bands();
    let mut data = radiance.data().to_vec();
    for (px, &ok) in data.chunks_exact_mut(d).zip(radiance.mask()) {
        if ok {
            for v in px {
                *v = (*v + normal.sample(&mut rng)).max(0.0);
            }
        }
    }
    Ok(radiance.with_data(data))
}
