//! Synthetic reflectance scenes: Voronoi patches whose reflectances are
//! convex combinations of smooth Gaussian-bump spectra.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetEntry, DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::spectral::io::write_scube;
use crate::spectral::{SpectralAxis, SpectralImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneRecipe {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub basis_count: usize,
    pub patch_count: usize,
    /// Fraction of pixels masked out as the reference target.
    pub mask_fraction: f64,
}

const BUMP_WIDTH_NM: (f64, f64) = (18.0, 70.0);

/// Reflectance cube for one recipe.
///
/// The last `round(mask_fraction · W·H)` pixels in row-major order form the
/// masked reference region; they hold a white (all-ones) reflectance.
pub fn synth_scene(recipe: &SceneRecipe, axis: SpectralAxis) -> Result<SpectralImage> {
    let SceneRecipe { width, height, basis_count, patch_count, mask_fraction, .. } = *recipe;
    if width == 0 || height == 0 || basis_count == 0 || patch_count == 0 {
        return Err(Error::InvalidArgument("scene recipe needs positive sizes and counts".into()));
    }
    if !(0.0..=1.0).contains(&mask_fraction) {
        return Err(Error::InvalidArgument(format!("mask fraction {mask_fraction} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let wl: Vec<f64> = axis.wavelengths().collect();
    let (lo, hi) = (axis.start_nm, axis.end_nm());

    let basis: Vec<Vec<f64>> = (0..basis_count)
        .map(|_| {
            let center = rng.random_range(lo..=hi);
            let width = rng.random_range(BUMP_WIDTH_NM.0..BUMP_WIDTH_NM.1);
            wl.iter().map(|l| (-0.5 * ((l - center) / width).powi(2)).exp()).collect()
        })
        .collect();

    let d = axis.count;
    let patches: Vec<((f64, f64), Vec<f64>)> = (0..patch_count)
        .map(|_| {
            let site = (rng.random_range(0.0..width as f64), rng.random_range(0.0..height as f64));
            // uniform point on the simplex via normalized exponentials
            let w: Vec<f64> = (0..basis_count).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            let albedo: f64 = rng.random_range(0.15..1.0);
            let refl = (0..d)
                .map(|i| {
                    let mix: f64 = w.iter().zip(&basis).map(|(wk, b)| wk / total * b[i]).sum();
                    (albedo * mix).clamp(0.0, 1.0)
                })
                .collect();
            (site, refl)
        })
        .collect();

    let n = width * height;
    let masked = (mask_fraction * n as f64).round() as usize;
    let mut data = Vec::with_capacity(n * d);
    let mut mask = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if i >= n - masked {
                data.extend(std::iter::repeat_n(1.0, d));
                mask.push(false);
                continue;
            }
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, ((sx, sy), _)) in patches.iter().enumerate() {
                let dist = (px - sx).powi(2) + (py - sy).powi(2);
                if dist < best_d {
                    best_d = dist;
                    best = k;
                }
            }
            data.extend_from_slice(&patches[best].1);
            mask.push(true);
        }
    }
    SpectralImage::new(width, height, axis, data, mask)
}

/// `count` recipes of `size`×`size` pixels with seeds `seed_base..`; basis
/// and patch counts cycle through 3–8 and 8–32.
pub fn recipes(count: usize, size: usize, seed_base: u64) -> Vec<SceneRecipe> {
    (0..count)
        .map(|i| SceneRecipe {
            seed: seed_base + i as u64,
            width: size,
            height: size,
            basis_count: 3 + (i * 5) % 6,
            patch_count: 8 + (i * 7) % 25,
            mask_fraction: 0.05,
        })
        .collect()
}

pub const BUNDLED_SCENES: usize = 30;
pub const BUNDLED_SIZE: usize = 64;
pub const BUNDLED_SEED: u64 = 10_000;

/// The fixed recipe list behind the bundled synthetic dataset: 30 scenes of
/// 64×64 pixels, every third one held out for testing.
pub fn bundled_recipes() -> Vec<SceneRecipe> {
    recipes(BUNDLED_SCENES, BUNDLED_SIZE, BUNDLED_SEED)
}

/// Split rule for a synthesized recipe list: every third scene is a test scene.
pub fn split_for(index: usize) -> Split {
    if index % 3 == 2 {
        Split::Test
    } else {
        Split::Train
    }
}

/// Writes `scene_NNN.scube` per recipe plus `manifest.txt` into `dir`.
/// Returns the manifest path.
pub fn synth_dataset(recipes: &[SceneRecipe], axis: SpectralAxis, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(recipes.len());
    for (i, r) in recipes.iter().enumerate() {
        let file = PathBuf::from(format!("scene_{i:03}.scube"));
        write_scube(dir.join(&file), &synth_scene(r, axis)?)?;
        entries.push(DatasetEntry { split: split_for(i), path: file });
    }
    let manifest = DatasetManifest { root: dir.to_path_buf(), entries };
    let path = dir.join("manifest.txt");
    manifest.write(&path)?;
    Ok(path)
}
