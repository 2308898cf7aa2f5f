use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Which end of the generalized spectrum of `(A, B)` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSelection {
    /// Smallest `lambda` of `A w = lambda B w`; minimizes the alignment objective.
    #[default]
    Smallest,
    /// Largest `lambda`, i.e. the smallest eigenvalues of `A^-1 B`.
    Largest,
}

#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Selected eigenvalues, ascending.
    pub values: Vec<f64>,
    /// n x d, B-orthonormal columns matching `values`.
    pub vectors: DMatrix<f64>,
    /// Ridge that was added to `B` before factorization (0 when none).
    pub ridge: f64,
}

const CONDITION_LIMIT: f64 = 1e12;

/// `d` smallest generalized eigenpairs of the symmetric pair `(A, B)` with
/// `B` positive semi-definite.
pub fn solve_generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>, d: usize) -> Result<GeneralizedEigen> {
    solve_generalized_eigen_selected(a, b, d, EigenSelection::Smallest)
}

pub fn solve_generalized_eigen_selected(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    d: usize,
    selection: EigenSelection,
) -> Result<GeneralizedEigen> {
    let n = linalg::require_square(a, "A")?;
    if b.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "A is {n}x{n} but B is {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    if d == 0 || d > n {
        return Err(Error::Parameter(format!("need 1 <= d <= {n}, got {d}")));
    }
    linalg::require_finite(a, "A")?;
    linalg::require_finite(b, "B")?;

    let b_sym = linalg::symmetrize(b);
    let (l, ridge) = factor_with_ridge(&b_sym)?;

    // C = L^-1 A L^-T shares the generalized spectrum of (A, B).
    let a_sym = linalg::symmetrize(a);
    let left = l
        .solve_lower_triangular(&a_sym)
        .ok_or_else(|| singular(f64::INFINITY, "triangular solve on B factor"))?;
    let c = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| singular(f64::INFINITY, "triangular solve on B factor"))?;
    let eig = linalg::sym_eigen(&c);

    let picked: Vec<usize> = match selection {
        EigenSelection::Smallest => (0..d).collect(),
        EigenSelection::Largest => (n - d..n).collect(),
    };
    let v = DMatrix::from_fn(n, d, |r, k| eig.vectors[(r, picked[k])]);
    let lt = l.transpose();
    let vectors = lt
        .solve_upper_triangular(&v)
        .ok_or_else(|| singular(f64::INFINITY, "back substitution on B factor"))?;
    let values = picked.iter().map(|&i| eig.values[i]).collect();
    Ok(GeneralizedEigen { values, vectors, ridge })
}

fn singular(condition: f64, context: &str) -> Error {
    Error::Singular {
        condition,
        context: context.to_string(),
    }
}

/// Cholesky factor of `B`, adding `1e-9 tr(B)/n` to the diagonal when the
/// factorization fails or its condition estimate exceeds `1e12`.
fn factor_with_ridge(b: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = b.nrows();
    let first = linalg::cholesky_with_estimate(b);
    let first_condition = match &first {
        Some((l, est)) if *est <= CONDITION_LIMIT => return Ok((l.clone(), 0.0)),
        Some((_, est)) => *est,
        None => f64::INFINITY,
    };
    let ridge = 1e-9 * b.trace() / n as f64;
    if !(ridge > 0.0) {
        return Err(singular(first_condition, "B has non-positive trace"));
    }
    let ridged = b + DMatrix::identity(n, n) * ridge;
    match linalg::cholesky_with_estimate(&ridged) {
        Some((l, _)) => Ok((l, ridge)),
        None => Err(singular(
            first_condition,
            "B is not positive definite even after ridge regularization",
        )),
    }
}
