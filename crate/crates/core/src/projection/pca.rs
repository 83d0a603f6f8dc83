use nalgebra::DMatrix;

use super::{Projection, ProjectionKind, ProjectionMetadata};
use crate::error::{Error, Result};
use crate::illuminant::IlluminantSet;
use crate::linalg::{covariance, symmetric_eig};

/// Eigenvalues below this fraction of the largest count as zero variance.
const RANK_TOLERANCE: f64 = 1e-10;

fn principal_basis(samples: &DMatrix<f64>, d_prime: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (n, d) = samples.shape();
    if d_prime == 0 || d_prime > d {
        return Err(Error::InvalidArgument(format!("d′ = {d_prime} must be in 1..={d}")));
    }
    if n < d_prime {
        return Err(Error::InvalidArgument(format!("{n} samples cannot support d′ = {d_prime}")));
    }
    let (mean, cov) = covariance(samples);
    let eig = symmetric_eig(&cov)?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::Degenerate("covariance is zero".into()));
    }
    let positive = eig.values.iter().filter(|&&l| l > RANK_TOLERANCE * top).count();
    if positive < d_prime {
        return Err(Error::Degenerate(format!(
            "only {positive} positive covariance eigenvalues for d′ = {d_prime}"
        )));
    }
    Ok((mean.iter().copied().collect(), eig.vectors.columns(0, d_prime).into_owned()))
}

/// PCA on sample rows: `μ` is the column mean, the basis holds the top-`d′`
/// covariance eigenvectors in descending eigenvalue order.
pub fn fit_pca(samples: &DMatrix<f64>, d_prime: usize) -> Result<Projection> {
    let (mean, basis) = principal_basis(samples, d_prime)?;
    Projection::new(
        ProjectionKind::Pca,
        Some(mean),
        basis,
        ProjectionMetadata {
            seed: None,
            training: format!("{} pixel chromaticities", samples.nrows()),
            camera: None,
        },
    )
}

/// PCA over the L1-normalized SPDs of an illuminant set.
pub fn fit_ill_pca(illums: &IlluminantSet, d_prime: usize) -> Result<Projection> {
    let d = illums.axis().count;
    let rows: Vec<f64> = illums.members().iter().flat_map(|m| m.chromaticity().values().to_vec()).collect();
    let samples = DMatrix::from_row_slice(illums.len(), d, &rows);
    let (mean, basis) = principal_basis(&samples, d_prime)?;
    Projection::new(
        ProjectionKind::IllPca,
        Some(mean),
        basis,
        ProjectionMetadata {
            seed: None,
            training: format!("illuminant SPDs: {}", illums.names().join(" ")),
            camera: None,
        },
    )
}

/// Coordinates of each illuminant's chromaticity on the leading `d′`
/// components of the set's own Ill-PCA basis, in member order.
pub fn illuminant_pca_coordinates(illums: &IlluminantSet, d_prime: usize) -> Result<Vec<Vec<f64>>> {
    let p = fit_ill_pca(illums, d_prime)?;
    illums.members().iter().map(|m| p.apply(m.chromaticity().values())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::illuminant::{Illuminant, SetRole};
    use crate::spectral::{SpectralAxis, Spectrum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruction_sse(x: &DMatrix<f64>, p: &Projection) -> f64 {
        let mean = p.mean().unwrap();
        let u = p.basis();
        let mut sse = 0.0;
        for row in x.row_iter() {
            let c: Vec<f64> = row.iter().copied().collect();
            let z = p.apply(&c).unwrap();
            for i in 0..c.len() {
                let rec: f64 = mean[i] + (0..z.len()).map(|k| u[(i, k)] * z[k]).sum::<f64>();
                sse += (c[i] - rec).powi(2);
            }
        }
        sse
    }

    #[test]
    fn x_axis_data() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 3.0, 0.0, -2.0, 0.0]);
        let p = fit_pca(&x, 1).unwrap();
        assert!((p.basis()[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(p.basis()[(1, 0)].abs() < 1e-12);
        assert!(reconstruction_sse(&x, &p) < 1e-20);
    }

    #[test]
    fn matches_truncated_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(6, 4, |_, _| rng.random_range(0.0..1.0));
        let p = fit_pca(&x, 2).unwrap();
        // oracle: singular values of the centred matrix
        let mut centred = x.clone();
        let mean = p.mean().unwrap();
        for mut row in centred.row_iter_mut() {
            for (v, m) in row.iter_mut().zip(mean) {
                *v -= m;
            }
        }
        let sv = centred.svd(false, false).singular_values;
        let mut s: Vec<f64> = sv.iter().map(|v| v * v).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let expected: f64 = s[2..].iter().sum();
        assert!((reconstruction_sse(&x, &p) - expected).abs() < 1e-8);
    }

    #[test]
    fn constant_data_is_degenerate() {
        let x = DMatrix::from_element(5, 3, 0.2);
        assert!(matches!(fit_pca(&x, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn basis_is_orthonormal_with_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(40, 8, |_, _| rng.random_range(0.0..1.0));
        let p = fit_pca(&x, 5).unwrap();
        let gram = p.basis().transpose() * p.basis();
        assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-8);
        for col in p.basis().column_iter() {
            let big = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(big > 0.0);
        }
    }

    fn illum(name: &str, values: Vec<f64>) -> Illuminant {
        let axis = SpectralAxis::new(400.0, 10.0, values.len()).unwrap();
        Illuminant::new(name, Spectrum::new(axis, values).unwrap()).unwrap()
    }

    #[test]
    fn two_illuminants_give_difference_direction() {
        let a = illum("a", vec![1.0, 2.0, 1.0]);
        let b = illum("b", vec![3.0, 1.0, 0.5]);
        let set = IlluminantSet::new(vec![a.clone(), b.clone()], SetRole::Projection).unwrap();
        let p = fit_ill_pca(&set, 1).unwrap();
        let ca = a.chromaticity();
        let cb = b.chromaticity();
        let diff: Vec<f64> = ca.values().iter().zip(cb.values()).map(|(x, y)| x - y).collect();
        let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cos: f64 = diff.iter().zip(p.basis().column(0).iter()).map(|(x, y)| x * y).sum::<f64>() / norm;
        assert!((cos.abs() - 1.0).abs() < 1e-10);
        assert_eq!(p.kind(), ProjectionKind::IllPca);
    }

    #[test]
    fn exact_span_with_n_minus_one_components() {
        let set = IlluminantSet::new(
            vec![
                illum("a", vec![1.0, 0.2, 0.3, 0.1]),
                illum("b", vec![0.1, 1.0, 0.2, 0.4]),
                illum("c", vec![0.3, 0.1, 1.0, 0.2]),
            ],
            SetRole::Projection,
        )
        .unwrap();
        let p = fit_ill_pca(&set, 2).unwrap();
        let rows: Vec<f64> = set.members().iter().flat_map(|m| m.chromaticity().values().to_vec()).collect();
        let x = DMatrix::from_row_slice(3, 4, &rows);
        assert!(reconstruction_sse(&x, &p) < 1e-20);
    }

    #[test]
    fn identical_spds_are_degenerate() {
        let set = IlluminantSet::new(
            vec![illum("a", vec![1.0, 2.0]), illum("b", vec![2.0, 4.0])],
            SetRole::Projection,
        )
        .unwrap();
        assert!(fit_ill_pca(&set, 1).is_err());
    }

    #[test]
    fn coordinates_are_centered() {
        let axis = SpectralAxis::new(400.0, 10.0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let members = (0..6)
            .map(|i| {
                let v = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
                Illuminant::new(format!("I{i}"), Spectrum::new(axis, v).unwrap()).unwrap()
            })
            .collect();
        let set = IlluminantSet::new(members, SetRole::Full).unwrap();
        let coords = illuminant_pca_coordinates(&set, 2).unwrap();
        assert_eq!(coords.len(), 6);
        for k in 0..2 {
            assert!(coords.iter().map(|c| c[k]).sum::<f64>().abs() < 1e-12);
        }
        let var = |k: usize| coords.iter().map(|c| c[k] * c[k]).sum::<f64>();
        assert!(var(0) >= var(1));
    }
}
