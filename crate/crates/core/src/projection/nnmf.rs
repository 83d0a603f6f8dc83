//! Frobenius-loss NNMF with Lee–Seung multiplicative updates.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Projection, ProjectionKind, ProjectionMetadata};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnmfOptions {
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative loss decrease of one iteration falls below this.
    pub tol: f64,
}

impl Default for NnmfOptions {
    fn default() -> Self {
        NnmfOptions { seed: 0, max_iter: 500, tol: 1e-6 }
    }
}

/// `X ≈ U V` with `U` (N×k) and `V` (k×d) non-negative.
#[derive(Debug, Clone)]
pub struct NnmfFactors {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// `‖X − UV‖²_F` at initialization and after every iteration.
    pub losses: Vec<f64>,
}

fn loss(x: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    (x - u * v).norm_squared()
}

fn multiplicative_step(target: &mut DMatrix<f64>, num: &DMatrix<f64>, den: &DMatrix<f64>) {
    for ((t, n), d) in target.iter_mut().zip(num.iter()).zip(den.iter()) {
        // den == 0 only when the matching factor row/column is entirely zero
        if *d > 0.0 {
            *t *= n / d;
        }
    }
}

pub fn factorize(x: &DMatrix<f64>, k: usize, opts: &NnmfOptions) -> Result<NnmfFactors> {
    let (n, d) = x.shape();
    if k == 0 {
        return Err(Error::InvalidArgument("NNMF rank must be ≥ 1".into()));
    }
    if x.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("NNMF input must be finite and non-negative".into()));
    }
    let mean = x.mean();
    if n == 0 || !(mean > 0.0) {
        return Err(Error::Degenerate("NNMF input is all zero".into()));
    }
    let scale = (mean / k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut u = DMatrix::from_fn(n, k, |_, _| scale * rng.random::<f64>());
    let mut v = DMatrix::from_fn(k, d, |_, _| scale * rng.random::<f64>());
    let mut losses = vec![loss(x, &u, &v)];
    for _ in 0..opts.max_iter {
        let num = x * v.transpose();
        let den = &u * (&v * v.transpose());
        multiplicative_step(&mut u, &num, &den);
        let num = u.transpose() * x;
        let den = (u.transpose() * &u) * &v;
        multiplicative_step(&mut v, &num, &den);

        let prev = *losses.last().unwrap();
        let cur = loss(x, &u, &v);
        losses.push(cur);
        if cur == 0.0 || (prev - cur) <= opts.tol * prev {
            break;
        }
    }
    Ok(NnmfFactors { u, v, losses })
}

/// Fits an NNMF basis `V` (d′×d) on training rows; encoding uses NNLS against `V`.
pub fn fit_nnmf(samples: &DMatrix<f64>, d_prime: usize, opts: &NnmfOptions) -> Result<Projection> {
    let f = factorize(samples, d_prime, opts)?;
    Projection::new(
        ProjectionKind::Nnmf,
        None,
        f.v,
        ProjectionMetadata {
            seed: Some(opts.seed),
            training: format!(
                "{} pixel chromaticities, {} iterations, final loss {:e}",
                samples.nrows(),
                f.losses.len() - 1,
                f.losses.last().unwrap()
            ),
            camera: None,
        },
    )
}
