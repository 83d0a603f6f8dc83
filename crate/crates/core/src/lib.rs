//! Hyperspectral illuminant estimation with Color-by-Correlation over
//! reduced spectral representations.
//!
//! Reflectance scenes are relit under candidate illuminants, reduced by one
//! of six projections (camera RGB, random, PCA, illuminant PCA, NNMF, LDA),
//! and classified by correlating chromaticity histograms. [`evaluation`]
//! runs the full experimental grid and the noise protocol.

pub mod baselines;
pub mod cbc;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod illuminant;
pub mod linalg;
pub mod projection;
pub mod spectral;
pub mod synth;

pub use cbc::{CorrelationModel, ScoringMode};
pub use error::{Error, Result};
pub use illuminant::{Illuminant, IlluminantSet};
pub use projection::{Projection, ProjectionKind};
pub use spectral::{SensitivityFunctions, SpectralAxis, SpectralImage, Spectrum};
