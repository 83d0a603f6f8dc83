use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::illuminant::IlluminantSet;
use crate::spectral::{downsample, l1_chromaticity, relight, SpectralImage};

/// Training samples for the learned projections, one row per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMatrix {
    pub rows: DMatrix<f64>,
    /// Per-row class (illuminant index), required by LDA.
    pub labels: Option<Vec<usize>>,
}

impl TrainingMatrix {
    pub fn new(rows: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if rows.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("training rows must be finite and non-negative".into()));
        }
        if let Some(l) = &labels {
            if l.len() != rows.nrows() {
                return Err(Error::DimensionMismatch { expected: rows.nrows(), got: l.len() });
            }
        }
        Ok(TrainingMatrix { rows, labels })
    }

    /// Like [`TrainingMatrix::new`] but also requires every row to sum to one.
    pub fn from_chromaticities(rows: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        for (i, row) in rows.row_iter().enumerate() {
            if (row.sum() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("training row {i} does not sum to 1")));
            }
        }
        TrainingMatrix::new(rows, labels)
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }
}

/// Relights every scene under every illuminant of `illums` (L1-normalized SPDs),
/// after downsampling by `factor`, and collects the chromaticity of each valid,
/// non-black pixel. Labels are illuminant indices.
pub fn training_matrix(scenes: &[SpectralImage], illums: &IlluminantSet, factor: usize) -> Result<TrainingMatrix> {
    let d = illums.axis().count;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let small = scenes.iter().map(|s| downsample(s, factor)).collect::<Result<Vec<_>>>()?;
    for scene in &small {
        for (label, illum) in illums.members().iter().enumerate() {
            let radiance = relight(scene, &illum.chromaticity())?;
            for px in radiance.valid_pixels() {
                if let Some(c) = l1_chromaticity(px) {
                    data.extend(c);
                    labels.push(label);
                }
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::NoValidPixels);
    }
    TrainingMatrix::from_chromaticities(DMatrix::from_row_slice(labels.len(), d, &data), Some(labels))
}
