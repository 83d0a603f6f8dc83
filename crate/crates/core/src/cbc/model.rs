use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{BoundsAccumulator, GridSpec, HistogramCounts, HistogramGrid};
use crate::error::{Error, Result};
use crate::illuminant::IlluminantSet;
use crate::projection::{content_hash, Projection, ProjectionKind};
use crate::spectral::{downsample, l1_normalize_in_place, SpectralImage};

pub const DEFAULT_SMOOTHING: f64 = 1e-9;

/// How a test histogram is correlated with a candidate grid. Higher is better.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    /// `Σ h_test · ln p_E`
    #[default]
    LogCorrelation,
    /// `Σ h_test · p_E`
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    pub bins: usize,
    pub smoothing: f64,
    /// Spatial downsampling applied to training scenes before accumulation.
    pub downsample: usize,
}

impl ModelOptions {
    pub fn with_bins(bins: usize) -> Self {
        ModelOptions { bins, smoothing: DEFAULT_SMOOTHING, downsample: 4 }
    }
}

/// Projected feature of one radiance pixel, or `None` for black pixels.
///
/// RGB projects raw radiance through the sensitivities and then L1-normalizes
/// the triple; every spectral kind L1-normalizes the spectrum first and then
/// projects it.
pub fn pixel_features(projection: &Projection, radiance: &[f64]) -> Result<Option<Vec<f64>>> {
    if projection.kind() == ProjectionKind::Rgb {
        let mut rgb = projection.apply(radiance)?;
        Ok(l1_normalize_in_place(&mut rgb).then_some(rgb))
    } else {
        let mut c = radiance.to_vec();
        if !l1_normalize_in_place(&mut c) {
            return Ok(None);
        }
        projection.apply(&c).map(Some)
    }
}

/// Features of every valid, non-black pixel of a radiance image.
pub fn image_features(projection: &Projection, radiance: &SpectralImage) -> Result<Vec<Vec<f64>>> {
    check_dims(projection, radiance)?;
    radiance
        .valid_pixels()
        .filter_map(|px| pixel_features(projection, px).transpose())
        .collect()
}

fn check_dims(projection: &Projection, image: &SpectralImage) -> Result<()> {
    if projection.input_dim() != image.bands() {
        return Err(Error::DimensionMismatch { expected: projection.input_dim(), got: image.bands() });
    }
    Ok(())
}

/// Calls `f` with the feature of each valid pixel of `scene` relit by `spd`.
fn for_each_relit_feature(
    projection: &Projection,
    scene: &SpectralImage,
    spd: &[f64],
    mut f: impl FnMut(&[f64]),
) -> Result<()> {
    let mut radiance = vec![0.0; spd.len()];
    for px in scene.valid_pixels() {
        for ((out, r), e) in radiance.iter_mut().zip(px).zip(spd) {
            *out = e * r;
        }
        if let Some(z) = pixel_features(projection, &radiance)? {
            f(&z);
        }
    }
    Ok(())
}

/// Per-candidate chromaticity histograms over a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    pub(crate) spec: GridSpec,
    pub(crate) smoothing: f64,
    pub(crate) projection_hash: [u8; 32],
    pub(crate) names: Vec<String>,
    pub(crate) grids: Vec<HistogramGrid>,
}

/// Winner of a classification plus every candidate's score.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub index: usize,
    pub name: String,
    pub scores: Vec<f64>,
}

/// Builds one smoothed histogram per candidate illuminant from training
/// reflectance scenes relit under that candidate (L1-normalized SPD).
/// Bin bounds are calibrated over every candidate's training features.
pub fn build_model(
    training: &[SpectralImage],
    candidates: &IlluminantSet,
    projection: &Projection,
    opts: &ModelOptions,
) -> Result<CorrelationModel> {
    let mut models = build_models(training, candidates, projection, &[opts.bins], opts.smoothing, opts.downsample)?;
    Ok(models.remove(0))
}

/// [`build_model`] for several bin counts at once. Features do not depend on
/// `B`, so one pass fills every grid; bounds are shared.
pub fn build_models(
    training: &[SpectralImage],
    candidates: &IlluminantSet,
    projection: &Projection,
    bins: &[usize],
    smoothing: f64,
    downsample_factor: usize,
) -> Result<Vec<CorrelationModel>> {
    if training.is_empty() {
        return Err(Error::InvalidArgument("no training scenes".into()));
    }
    if bins.is_empty() {
        return Err(Error::InvalidArgument("no bin counts given".into()));
    }
    if !(smoothing > 0.0) {
        return Err(Error::InvalidArgument("smoothing must be positive".into()));
    }
    let scenes = training.iter().map(|s| downsample(s, downsample_factor)).collect::<Result<Vec<_>>>()?;
    for s in &scenes {
        check_dims(projection, s)?;
        if s.axis() != candidates.axis() {
            return Err(Error::AxisMismatch { left: *s.axis(), right: *candidates.axis() });
        }
    }
    let spds: Vec<Vec<f64>> = candidates.members().iter().map(|m| m.chromaticity().values().to_vec()).collect();
    let names = candidates.names();

    let dims = projection.output_dim();
    let partial: Vec<BoundsAccumulator> = spds
        .par_iter()
        .map(|spd| {
            let mut acc = BoundsAccumulator::new(dims);
            for scene in &scenes {
                for_each_relit_feature(projection, scene, spd, |z| acc.push(z))?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut bounds = BoundsAccumulator::new(dims);
    partial.iter().for_each(|p| bounds.merge(p));
    let bounds = bounds.finish()?;
    let specs = bins.iter().map(|&b| GridSpec::new(b, bounds.clone())).collect::<Result<Vec<_>>>()?;

    // grids[candidate][bin setting]
    let grids: Vec<Vec<HistogramGrid>> = spds
        .par_iter()
        .zip(names.par_iter())
        .map(|(spd, name)| {
            let mut counts = vec![HistogramCounts::default(); specs.len()];
            for scene in &scenes {
                for_each_relit_feature(projection, scene, spd, |z| {
                    for (c, spec) in counts.iter_mut().zip(&specs) {
                        c.add(spec.bin_index(z));
                    }
                })?;
            }
            if counts[0].total == 0 {
                return Err(Error::Degenerate(format!("no training pixels for candidate {name}")));
            }
            counts.iter().zip(&specs).map(|(c, spec)| HistogramGrid::from_counts(c, spec.cells(), smoothing)).collect()
        })
        .collect::<Result<_>>()?;

    let hash = content_hash(projection);
    Ok(specs
        .into_iter()
        .enumerate()
        .map(|(j, spec)| CorrelationModel {
            spec,
            smoothing,
            projection_hash: hash,
            names: names.iter().map(|s| s.to_string()).collect(),
            grids: grids.iter().map(|g| g[j].clone()).collect(),
        })
        .collect())
}

impl CorrelationModel {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn projection_hash(&self) -> &[u8; 32] {
        &self.projection_hash
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn grids(&self) -> &[HistogramGrid] {
        &self.grids
    }

    pub fn check_projection(&self, projection: &Projection) -> Result<()> {
        if content_hash(projection) != self.projection_hash {
            return Err(Error::InvalidArgument("projection does not match the one the model was built with".into()));
        }
        if projection.output_dim() != self.spec.dims() {
            return Err(Error::DimensionMismatch { expected: self.spec.dims(), got: projection.output_dim() });
        }
        Ok(())
    }

    /// Normalized histogram of precomputed features on the model's grid.
    pub fn feature_histogram(&self, features: &[Vec<f64>]) -> Result<Vec<(u64, f64)>> {
        let mut counts = HistogramCounts::default();
        for z in features {
            if z.len() != self.spec.dims() {
                return Err(Error::DimensionMismatch { expected: self.spec.dims(), got: z.len() });
            }
            counts.add(self.spec.bin_index(z));
        }
        if counts.total == 0 {
            return Err(Error::NoValidPixels);
        }
        Ok(counts.frequencies())
    }

    /// Normalized histogram of a test radiance image on the model's grid.
    pub fn test_histogram(&self, projection: &Projection, radiance: &SpectralImage) -> Result<Vec<(u64, f64)>> {
        self.feature_histogram(&image_features(projection, radiance)?)
    }

    /// Correlation of a normalized test histogram with every candidate grid.
    pub fn score_histogram(&self, hist: &[(u64, f64)], mode: ScoringMode) -> Vec<f64> {
        self.grids
            .iter()
            .map(|g| match mode {
                ScoringMode::LogCorrelation => hist.iter().map(|&(k, h)| h * g.probability(k).ln()).sum(),
                ScoringMode::Dot => hist.iter().map(|&(k, h)| h * g.probability(k)).sum(),
            })
            .collect()
    }

    /// Correlation of a test radiance image with every candidate grid.
    pub fn score(&self, projection: &Projection, radiance: &SpectralImage, mode: ScoringMode) -> Result<Vec<f64>> {
        self.check_projection(projection)?;
        let hist = self.test_histogram(projection, radiance)?;
        Ok(self.score_histogram(&hist, mode))
    }

    /// Winner for precomputed test features (see [`image_features`]).
    pub fn classify_features(&self, features: &[Vec<f64>], mode: ScoringMode) -> Result<Classification> {
        let scores = self.score_histogram(&self.feature_histogram(features)?, mode);
        Ok(self.winner(scores))
    }

    fn winner(&self, scores: Vec<f64>) -> Classification {
        let index = argmax_first(&scores);
        Classification { index, name: self.names[index].clone(), scores }
    }

    /// Highest-scoring candidate; ties go to the lowest candidate index.
    pub fn classify(&self, projection: &Projection, radiance: &SpectralImage, mode: ScoringMode) -> Result<Classification> {
        Ok(self.winner(self.score(projection, radiance, mode)?))
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
