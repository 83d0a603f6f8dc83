use nalgebra::{Cholesky, DMatrix, DVector};

use super::{Projection, ProjectionKind, ProjectionMetadata, TrainingMatrix};
use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, symmetric_eig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaOptions {
    /// Ridge `γ = shrinkage · trace(S_within) / d` added to `S_within`.
    pub shrinkage: f64,
}

impl Default for LdaOptions {
    fn default() -> Self {
        LdaOptions { shrinkage: 1e-6 }
    }
}

struct Scatter {
    between: DMatrix<f64>,
    within: DMatrix<f64>,
    classes: usize,
}

fn scatter(x: &DMatrix<f64>, labels: &[usize]) -> Result<Scatter> {
    let (n, d) = x.shape();
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sums = vec![DVector::<f64>::zeros(d); k];
    let mut counts = vec![0usize; k];
    for (row, &l) in x.row_iter().zip(labels) {
        sums[l] += row.transpose();
        counts[l] += 1;
    }
    let classes = counts.iter().filter(|&&c| c > 0).count();
    let total = x.row_iter().fold(DVector::zeros(d), |acc, r| acc + r.transpose()) / n as f64;
    let means: Vec<DVector<f64>> =
        sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { s.clone() }).collect();
    let mut within = DMatrix::zeros(d, d);
    for (row, &l) in x.row_iter().zip(labels) {
        let diff = row.transpose() - &means[l];
        within += &diff * diff.transpose();
    }
    let mut between = DMatrix::zeros(d, d);
    for (m, &c) in means.iter().zip(&counts) {
        if c > 0 {
            let diff = m - &total;
            between += (&diff * diff.transpose()) * c as f64;
        }
    }
    Ok(Scatter { between, within, classes })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Generalized eigenpairs of `(S_between, S_within + γI)`, descending.
///
/// Returned eigenvector columns are unit length with the canonical sign.
pub fn lda_eigen(x: &TrainingMatrix, opts: &LdaOptions) -> Result<(Vec<f64>, DMatrix<f64>, usize)> {
    let labels = x
        .labels
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("LDA needs per-row class labels".into()))?;
    let d = x.rows.ncols();
    let s = scatter(&x.rows, labels)?;
    if s.classes < 2 {
        return Err(Error::InvalidArgument(format!("LDA needs ≥ 2 classes, got {}", s.classes)));
    }
    let gamma = opts.shrinkage * s.within.trace() / d as f64;
    let regularized = &s.within + DMatrix::identity(d, d) * gamma;
    let chol = Cholesky::new(regularized)
        .ok_or_else(|| Error::Degenerate("regularized within-class scatter is singular".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("within-class Cholesky factor is singular".into()))?;
    let mut reduced = &l_inv * &s.between * l_inv.transpose();
    symmetrize(&mut reduced);
    let eig = symmetric_eig(&reduced)?;
    let mut w = l_inv.transpose() * &eig.vectors;
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
        let mut v: Vec<f64> = col.iter().copied().collect();
        canonical_sign(&mut v);
        col.copy_from_slice(&v);
    }
    Ok((eig.values, w, s.classes))
}

/// Fisher LDA: rows of the stored basis are the top-`d′` discriminant directions.
pub fn fit_lda(x: &TrainingMatrix, d_prime: usize, opts: &LdaOptions) -> Result<Projection> {
    if d_prime == 0 {
        return Err(Error::InvalidArgument("d′ must be ≥ 1".into()));
    }
    let (_, w, classes) = lda_eigen(x, opts)?;
    if d_prime > classes - 1 {
        return Err(Error::InvalidArgument(format!(
            "LDA d′ = {d_prime} exceeds classes − 1 = {}",
            classes - 1
        )));
    }
    let basis = w.columns(0, d_prime).transpose();
    Projection::new(
        ProjectionKind::Lda,
        None,
        basis,
        ProjectionMetadata {
            seed: None,
            training: format!("{} labelled pixel chromaticities, {classes} classes", x.rows.nrows()),
            camera: None,
        },
    )
}

/// `tr(Wᵀ S_b W) / tr(Wᵀ S_w W)` of a projection under the given labels.
pub fn fisher_ratio(p: &Projection, x: &TrainingMatrix) -> Result<f64> {
    let labels = x.labels.as_deref().ok_or_else(|| Error::InvalidArgument("labels required".into()))?;
    let s = scatter(&x.rows, labels)?;
    let w = if p.kind().column_basis() { p.basis().clone() } else { p.basis().transpose() };
    let b = (w.transpose() * &s.between * &w).trace();
    let wi = (w.transpose() * &s.within * &w).trace();
    Ok(b / wi)
}
