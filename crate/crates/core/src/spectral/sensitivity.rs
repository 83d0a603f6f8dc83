use crate::error::{Error, Result};

use super::SpectralAxis;

/// Per-channel camera sensitivities `S_p(λ)` for `p ∈ {R, G, B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityFunctions {
    pub axis: SpectralAxis,
    pub rows: [Vec<f64>; 3],
    pub camera_name: String,
}

impl SensitivityFunctions {
    pub fn new(axis: SpectralAxis, rows: [Vec<f64>; 3], camera_name: impl Into<String>) -> Result<Self> {
        for (c, row) in rows.iter().enumerate() {
            if row.len() != axis.count {
                return Err(Error::DimensionMismatch { expected: axis.count, got: row.len() });
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidArgument(format!("channel {c} has negative or non-finite sensitivity")));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidArgument(format!("channel {c} is identically zero")));
            }
        }
        Ok(SensitivityFunctions { axis, rows, camera_name: camera_name.into() })
    }

    /// Sensor response for one radiance spectrum, including the `Δλ` factor.
    pub fn respond(&self, radiance: &[f64]) -> [f64; 3] {
        let step = self.axis.step_nm;
        let mut out = [0.0; 3];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(radiance).map(|(s, c)| s * c).sum::<f64>() * step;
        }
        out
    }

    pub fn scaled(&self, alpha: f64) -> SensitivityFunctions {
        let mut out = self.clone();
        out.rows.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v *= alpha));
        out
    }
}
