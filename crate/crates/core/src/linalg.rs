//! Thin wrappers over the dense symmetric eigensolver.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Eigenvalues below this are treated as zero in entropy sums.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: Mat<f64>,
}

pub fn sym_eigen(m: MatRef<'_, f64>) -> Result<SymEigen> {
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigen(n))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok(SymEigen {
        values,
        vectors: evd.U().to_owned(),
    })
}

pub fn sym_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigen(m.nrows()))
}

/// `-sum p ln p` over the entries above [`ENTROPY_FLOOR`].
pub fn entropy_of(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > ENTROPY_FLOOR)
        .map(|p| -p * p.ln())
        .sum()
}

/// `ln sum_i exp(x_i)` without overflow.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `V diag(w) V^T` for the given eigen-columns.
pub fn reconstruct(vectors: MatRef<'_, f64>, weights: &[f64]) -> Mat<f64> {
    let n = vectors.nrows();
    let scaled = Mat::from_fn(n, weights.len(), |i, k| vectors[(i, k)] * weights[k]);
    scaled * vectors.transpose()
}

/// Matrix function of a symmetric matrix via its eigendecomposition.
pub fn sym_apply(m: MatRef<'_, f64>, f: impl Fn(f64) -> f64) -> Result<Mat<f64>> {
    let eig = sym_eigen(m)?;
    let w: Vec<f64> = eig.values.iter().map(|&x| f(x)).collect();
    Ok(reconstruct(eig.vectors.as_ref(), &w))
}

pub fn trace(m: MatRef<'_, f64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `tr(A B)` for square matrices of equal size.
pub fn trace_product(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_asymmetry(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
