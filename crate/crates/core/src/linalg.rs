//! Dense symmetric linear-algebra helpers shared by the classical and
//! verification modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector of `values[i]`.
    pub vectors: DMatrix<f64>,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn sym_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    SortedEigen { values, vectors }
}

/// Condition number of a symmetric positive-definite matrix from its spectrum.
pub fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let eig = sym_eigen(m);
    let lo = eig.values.first().copied().unwrap_or(0.0);
    let hi = eig.values.last().copied().unwrap_or(0.0);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Lower-triangular Cholesky factor together with a cheap condition estimate
/// `(max L_ii / min L_ii)^2`, which never exceeds the true 2-norm condition.
pub(crate) fn cholesky_with_estimate(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let chol = nalgebra::Cholesky::new(m.clone())?;
    let l = chol.l();
    let diag = l.diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let estimate = if lo > 0.0 { (hi / lo).powi(2) } else { f64::INFINITY };
    Some((l, estimate))
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relative Frobenius deviation of `a` from the best scalar multiple of `b`:
/// `min_c |a - c b|_F / |a|_F`. Returns the deviation and the fitted `c`.
pub fn proportionality_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
    let bb: f64 = b.iter().map(|v| v * v).sum();
    let ab: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
    let scale = if bb > 0.0 { ab / bb } else { 0.0 };
    let resid = frobenius(&(a - b * scale));
    let norm = frobenius(a);
    (if norm > 0.0 { resid / norm } else { resid }, scale)
}

pub fn require_square(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn require_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} contains non-finite entries")))
    }
}

pub(crate) fn squared_distance(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    a.column(i)
        .iter()
        .zip(b.column(j).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

pub(crate) fn outer(v: &DVector<f64>) -> DMatrix<f64> {
    v * v.transpose()
}
