use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform wavelength grid: `count` samples starting at `start_nm`, `step_nm` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralAxis {
    pub start_nm: f64,
    pub step_nm: f64,
    pub count: usize,
}

impl Default for SpectralAxis {
    /// 400–700 nm at 10 nm, 31 bands.
    fn default() -> Self {
        SpectralAxis { start_nm: 400.0, step_nm: 10.0, count: 31 }
    }
}

impl SpectralAxis {
    pub fn new(start_nm: f64, step_nm: f64, count: usize) -> Result<Self> {
        if !(step_nm > 0.0) || !start_nm.is_finite() || !step_nm.is_finite() {
            return Err(Error::InvalidArgument(format!("bad axis step {step_nm} nm")));
        }
        if count == 0 {
            return Err(Error::InvalidArgument("axis needs at least one sample".into()));
        }
        Ok(SpectralAxis { start_nm, step_nm, count })
    }

    /// Builds an axis from explicit wavelengths, which must be strictly
    /// increasing and uniformly spaced.
    pub fn from_wavelengths(wavelengths: &[f64]) -> Result<Self> {
        match wavelengths {
            [] => Err(Error::InvalidArgument("no wavelengths".into())),
            [only] => SpectralAxis::new(*only, 1.0, 1),
            [first, second, ..] => {
                let step = second - first;
                for (i, pair) in wavelengths.windows(2).enumerate() {
                    let d = pair[1] - pair[0];
                    if !(d > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "wavelengths not strictly increasing at index {}",
                            i + 1
                        )));
                    }
                    if (d - step).abs() > 1e-6 * step.abs().max(1.0) {
                        return Err(Error::InvalidArgument(format!(
                            "non-uniform wavelength step at index {}",
                            i + 1
                        )));
                    }
                }
                SpectralAxis::new(*first, step, wavelengths.len())
            }
        }
    }

    pub fn wavelength(&self, i: usize) -> f64 {
        self.start_nm + self.step_nm * i as f64
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.wavelength(i))
    }

    pub fn end_nm(&self) -> f64 {
        self.wavelength(self.count - 1)
    }

    pub(crate) fn ensure_same(&self, other: &SpectralAxis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AxisMismatch { left: *self, right: *other })
        }
    }
}

impl fmt::Display for SpectralAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}..{} nm step {} nm, {} bands]",
            self.start_nm,
            self.end_nm(),
            self.step_nm,
            self.count
        )
    }
}

/// Samples of a reflectance, radiance or SPD on a [`SpectralAxis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    axis: SpectralAxis,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(axis: SpectralAxis, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.count {
            return Err(Error::DimensionMismatch { expected: axis.count, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("spectrum contains non-finite values".into()));
        }
        Ok(Spectrum { axis, values })
    }

    pub fn axis(&self) -> &SpectralAxis {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `None` when the spectrum is (near) zero.
    pub fn l1_normalized(&self) -> Option<Spectrum> {
        super::l1_chromaticity(&self.values).map(|values| Spectrum { axis: self.axis, values })
    }
}
