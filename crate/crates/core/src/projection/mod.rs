//! Spectral dimensionality reduction behind a single [`Projection`] contract.
//!
//! | kind    | stored basis | apply                         |
//! |---------|--------------|-------------------------------|
//! | RGB     | `S` (3×d)    | `z = S c`                     |
//! | RAND    | `S` (d′×d)   | `z = S c`                     |
//! | PCA     | `U` (d×d′)   | `z = Uᵀ (c − μ)`              |
//! | ILL_PCA | `U` (d×d′)   | `z = Uᵀ (c − μ)`              |
//! | NNMF    | `V` (d′×d)   | `z = argmin_{z≥0} ‖c − zV‖²`  |
//! | LDA     | `Wᵀ` (d′×d)  | `z = Wᵀ c`                    |

mod format;
mod lda;
mod nnmf;
mod pca;
mod training;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use format::{content_hash, decode_projection, encode_projection, read_projection, write_projection};
pub use lda::{fisher_ratio, fit_lda, lda_eigen, LdaOptions};
pub use nnmf::{factorize, fit_nnmf, NnmfFactors, NnmfOptions};
pub use pca::{fit_ill_pca, fit_pca, illuminant_pca_coordinates};
pub use training::{training_matrix, TrainingMatrix};

use crate::error::{Error, Result};
use crate::linalg::nnls;
use crate::spectral::SensitivityFunctions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProjectionKind {
    Rgb,
    Rand,
    Pca,
    IllPca,
    Nnmf,
    Lda,
}

impl ProjectionKind {
    pub const ALL: [ProjectionKind; 6] = [
        ProjectionKind::Rgb,
        ProjectionKind::Rand,
        ProjectionKind::Pca,
        ProjectionKind::IllPca,
        ProjectionKind::Nnmf,
        ProjectionKind::Lda,
    ];

    pub fn code(self) -> u8 {
        match self {
            ProjectionKind::Rgb => 0,
            ProjectionKind::Rand => 1,
            ProjectionKind::Pca => 2,
            ProjectionKind::IllPca => 3,
            ProjectionKind::Nnmf => 4,
            ProjectionKind::Lda => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            ProjectionKind::Rgb => "RGB",
            ProjectionKind::Rand => "RAND",
            ProjectionKind::Pca => "PCA",
            ProjectionKind::IllPca => "ILL_PCA",
            ProjectionKind::Nnmf => "NNMF",
            ProjectionKind::Lda => "LDA",
        }
    }

    /// PCA-style kinds store a `d × d′` basis; all others store `d′ × d`.
    fn column_basis(self) -> bool {
        matches!(self, ProjectionKind::Pca | ProjectionKind::IllPca)
    }
}

impl fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ProjectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        match norm.as_str() {
            "RGB" => Ok(ProjectionKind::Rgb),
            "RAND" | "RANDOM" => Ok(ProjectionKind::Rand),
            "PCA" => Ok(ProjectionKind::Pca),
            "ILL_PCA" | "ILLPCA" => Ok(ProjectionKind::IllPca),
            "NNMF" | "NMF" => Ok(ProjectionKind::Nnmf),
            "LDA" => Ok(ProjectionKind::Lda),
            _ => Err(Error::InvalidArgument(format!("unknown projection method {s:?}"))),
        }
    }
}

/// Provenance stored alongside a fitted projection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMetadata {
    pub seed: Option<u64>,
    pub training: String,
    pub camera: Option<String>,
}

/// A fitted spectral reduction transform from `d` to `d′` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    kind: ProjectionKind,
    input_dim: usize,
    output_dim: usize,
    mean: Option<Vec<f64>>,
    basis: DMatrix<f64>,
    pub metadata: ProjectionMetadata,
}

impl Projection {
    /// Validates the per-kind invariants and builds a projection.
    pub fn new(
        kind: ProjectionKind,
        mean: Option<Vec<f64>>,
        basis: DMatrix<f64>,
        metadata: ProjectionMetadata,
    ) -> Result<Self> {
        let (input_dim, output_dim) = if kind.column_basis() {
            basis.shape()
        } else {
            (basis.ncols(), basis.nrows())
        };
        if output_dim == 0 || input_dim == 0 {
            return Err(Error::InvalidArgument("projection needs d ≥ 1 and d′ ≥ 1".into()));
        }
        if kind == ProjectionKind::Rgb && output_dim != 3 {
            return Err(Error::InvalidArgument(format!("RGB projection is fixed to d′ = 3, got {output_dim}")));
        }
        if let Some(m) = &mean {
            if m.len() != input_dim {
                return Err(Error::DimensionMismatch { expected: input_dim, got: m.len() });
            }
        }
        if kind == ProjectionKind::Nnmf && basis.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("NNMF basis must be non-negative".into()));
        }
        if basis.iter().chain(mean.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("projection has non-finite entries".into()));
        }
        Ok(Projection { kind, input_dim, output_dim, mean, basis, metadata })
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn mean(&self) -> Option<&[f64]> {
        self.mean.as_deref()
    }

    /// Basis in its stored orientation (see the module table).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Projects one (chromaticity) spectrum.
    pub fn apply(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: c.len() });
        }
        match self.kind {
            ProjectionKind::Rgb | ProjectionKind::Rand | ProjectionKind::Lda => Ok(self
                .basis
                .row_iter()
                .map(|row| row.iter().zip(c).map(|(s, v)| s * v).sum())
                .collect()),
            ProjectionKind::Pca | ProjectionKind::IllPca => {
                let mean = self.mean.as_deref();
                Ok(self
                    .basis
                    .column_iter()
                    .map(|col| {
                        col.iter()
                            .enumerate()
                            .map(|(i, u)| u * (c[i] - mean.map_or(0.0, |m| m[i])))
                            .sum()
                    })
                    .collect())
            }
            ProjectionKind::Nnmf => nnls(&self.basis, c),
        }
    }
}

/// Camera RGB baseline: the basis is the 3×d sensitivity matrix.
pub fn fit_rgb(sens: &SensitivityFunctions) -> Result<Projection> {
    let d = sens.axis.count;
    let basis = DMatrix::from_fn(3, d, |r, c| sens.rows[r][c]);
    Projection::new(
        ProjectionKind::Rgb,
        None,
        basis,
        ProjectionMetadata {
            seed: None,
            training: "camera sensitivities".into(),
            camera: Some(sens.camera_name.clone()),
        },
    )
}

/// Random projection with i.i.d. entries uniform on `[−1, 1]`, filled row-major.
pub fn fit_rand(d: usize, d_prime: usize, seed: u64) -> Result<Projection> {
    if d_prime == 0 || d == 0 {
        return Err(Error::InvalidArgument("random projection needs d ≥ 1 and d′ ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..d * d_prime).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Projection::new(
        ProjectionKind::Rand,
        None,
        DMatrix::from_row_slice(d_prime, d, &values),
        ProjectionMetadata { seed: Some(seed), training: "none".into(), camera: None },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralAxis;

    #[test]
    fn kind_parsing() {
        assert_eq!("ill-pca".parse::<ProjectionKind>().unwrap(), ProjectionKind::IllPca);
        assert_eq!("nnmf".parse::<ProjectionKind>().unwrap(), ProjectionKind::Nnmf);
        assert!("svd".parse::<ProjectionKind>().is_err());
        for k in ProjectionKind::ALL {
            assert_eq!(ProjectionKind::from_code(k.code()), Some(k));
            assert_eq!(k.label().parse::<ProjectionKind>().unwrap(), k);
        }
    }

    #[test]
    fn pca_identity_basis_picks_leading_entries() {
        let basis = DMatrix::from_fn(4, 2, |r, c| if r == c { 1.0 } else { 0.0 });
        let p = Projection::new(ProjectionKind::Pca, Some(vec![0.0; 4]), basis, Default::default()).unwrap();
        assert_eq!(p.apply(&[0.1, 0.2, 0.3, 0.4]).unwrap(), vec![0.1, 0.2]);
        assert!(p.apply(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn nnmf_one_hot_basis_is_clipped_inner_product() {
        let basis = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = Projection::new(ProjectionKind::Nnmf, None, basis, Default::default()).unwrap();
        let z = p.apply(&[0.2, 0.5, 0.3]).unwrap();
        assert!((z[0] - 0.2).abs() < 1e-12 && (z[1] - 0.3).abs() < 1e-12);
        let neg = Projection::new(
            ProjectionKind::Nnmf,
            None,
            DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]),
            Default::default(),
        );
        assert!(neg.is_err());
    }

    #[test]
    fn zero_random_matrix_maps_to_zero() {
        let p = Projection::new(ProjectionKind::Rand, None, DMatrix::zeros(3, 5), Default::default()).unwrap();
        assert_eq!(p.apply(&[0.2; 5]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn rand_range_and_determinism() {
        let a = fit_rand(31, 5, 42).unwrap();
        assert_eq!(a, fit_rand(31, 5, 42).unwrap());
        assert_ne!(a.basis(), fit_rand(31, 5, 43).unwrap().basis());
        let big = fit_rand(1000, 100, 7).unwrap();
        assert!(big.basis().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(fit_rand(31, 0, 1).is_err());
    }

    #[test]
    fn rgb_fixed_to_three_and_linear() {
        let axis = SpectralAxis::new(400.0, 10.0, 4).unwrap();
        let sens = SensitivityFunctions::new(
            axis,
            [vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]],
            "onehot",
        )
        .unwrap();
        let p = fit_rgb(&sens).unwrap();
        assert_eq!(p.output_dim(), 3);
        assert_eq!(p.apply(&[0.1, 0.2, 0.3, 0.4]).unwrap(), vec![0.4, 0.2, 0.1]);
        let scaled = fit_rgb(&sens.scaled(2.5)).unwrap();
        let c = [0.3, 0.1, 0.5, 0.7];
        for (a, b) in p.apply(&c).unwrap().iter().zip(scaled.apply(&c).unwrap()) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
        assert!(Projection::new(ProjectionKind::Rgb, None, DMatrix::zeros(4, 4), Default::default()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn linear_kinds_are_homogeneous(
            c in proptest::collection::vec(0.0f64..1.0, 6),
            alpha in 0.01f64..100.0,
            seed in 0u64..100,
        ) {
            let p = fit_rand(6, 3, seed).unwrap();
            let scaled: Vec<f64> = c.iter().map(|v| v * alpha).collect();
            let a = p.apply(&c).unwrap();
            let b = p.apply(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                proptest::prop_assert!((alpha * x - y).abs() < 1e-10 * (1.0 + y.abs()));
            }
        }
    }
}
