//! Fixtures shared by the benchmarks.

use std::path::Path;

use spectracc::illuminant::{load_illuminants, IlluminantSet};
use spectracc::synth::{recipes, synth_scene};
use spectracc::{SpectralAxis, SpectralImage};

pub fn cie() -> IlluminantSet {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/cie/manifest.txt");
    load_illuminants(manifest).expect("bundled CIE illuminants")
}

/// `count` synthetic reflectance scenes of `size × size` pixels.
pub fn scenes(count: usize, size: usize) -> Vec<SpectralImage> {
    recipes(count, size, 1)
        .iter()
        .map(|r| synth_scene(r, SpectralAxis::default()).expect("synthetic scene"))
        .collect()
}
