//! Dense kernels used by the projection fits.
//!
//! Matrices are `nalgebra::DMatrix<f64>`; the symmetric eigensolver and the
//! NNLS solver are implemented here, nalgebra supplies storage and the small
//! Cholesky/SVD solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector of `values[i]`, with its
    /// largest-magnitude entry positive.
    pub vectors: DMatrix<f64>,
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn symmetric_eig(a: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let asym = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)] - a[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }

    let mut m = a.clone();
    // symmetrize exactly so rotations see identical off-diagonal pairs
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob = m.norm();
    const MAX_SWEEPS: usize = 100;
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Jacobi eigensolver", MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = v.column(src).iter().copied().collect();
        canonical_sign(&mut col);
        vectors.set_column(dst, &DVector::from_vec(col));
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Unconstrained least squares `argmin_x ‖A x − b‖₂` via SVD.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone()
        .svd(true, true)
        .solve(b, 1e-13)
        .map_err(|e| Error::Degenerate(format!("least squares: {e}")))
}

/// Lawson–Hanson active-set solver for `argmin_{z ≥ 0} ‖c − z V‖₂²`,
/// where `V` is `k × d` (one basis spectrum per row) and `c` has length `d`.
pub fn nnls(v: &DMatrix<f64>, c: &[f64]) -> Result<Vec<f64>> {
    let (k, d) = v.shape();
    if c.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: c.len() });
    }
    if v.iter().chain(c).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("NNLS inputs must be finite".into()));
    }
    let a = v.transpose(); // d × k
    let b = DVector::from_column_slice(c);
    let tol = 1e-12 * (1.0 + a.norm() * b.norm());
    let max_iter = 30 * k + 100;

    let mut x = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    let gradient = |x: &DVector<f64>| a.transpose() * (&b - &a * x);

    let solve_passive = |passive: &[bool]| -> Result<DVector<f64>> {
        let cols: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&cols);
        let sol = least_squares(&sub, &b)?;
        let mut s = DVector::zeros(k);
        for (i, &j) in cols.iter().enumerate() {
            s[j] = sol[i];
        }
        Ok(s)
    };

    let mut iterations = 0;
    loop {
        let w = gradient(&x);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::NoConvergence("NNLS", max_iter));
            }
            let s = solve_passive(&passive)?;
            if (0..k).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in (0..k).filter(|&i| passive[i] && s[i] <= 0.0) {
                alpha = alpha.min(x[i] / (x[i] - s[i]));
            }
            x += (s - &x) * alpha;
            for i in 0..k {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Ok(x.iter().map(|&z| z.max(0.0)).collect())
}

/// Largest KKT violation of a candidate NNLS solution.
pub fn nnls_kkt_residual(v: &DMatrix<f64>, c: &[f64], z: &[f64]) -> f64 {
    let a = v.transpose();
    let b = DVector::from_column_slice(c);
    let x = DVector::from_column_slice(z);
    let w = a.transpose() * (b - &a * &x);
    let mut worst = 0.0f64;
    for i in 0..z.len() {
        worst = worst.max((-z[i]).max(0.0));
        if z[i] > 0.0 {
            worst = worst.max(w[i].abs());
        } else {
            worst = worst.max(w[i].max(0.0));
        }
    }
    worst
}

/// Sample covariance (`1/(N−1)`) and column mean of the rows of `x`.
pub fn covariance(x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.nrows();
    let mean = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n as f64));
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let cov = centered.transpose() * &centered / denom;
    (mean, cov)
}
