use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralKind {
    /// `K M K` in the eigenbasis of `K`, rotation `gamma * lambda`.
    B,
    /// `K L K` in the eigenbasis of `K`, rotation `gamma * lambda`.
    A,
    /// `A^-1/2 B A^-1/2` in the eigenbasis of `A`, rotation `gamma / sqrt(lambda)`.
    G,
}

/// Result of rebuilding an operator from its spectral formula.
#[derive(Debug, Clone)]
pub struct SpectralBuild {
    pub kind: SpectralKind,
    /// Eigenvectors of the reference matrix (`K`, or `A` for `G`), as columns.
    pub basis: DMatrix<f64>,
    pub eigvals: Vec<f64>,
    pub gamma: f64,
    /// Probability of the post-selected ancilla outcome for the normalized
    /// input state: `tr(raw) / tr(rho_in)`.
    pub success_prob: f64,
    /// `sum_ij |f(lambda_i) f(lambda_j)|^2`, the normalizer written with the
    /// construction. Can exceed one.
    pub pair_normalizer: f64,
    /// Rebuilt operator before normalization.
    pub raw: DMatrix<f64>,
    /// Rebuilt operator normalized to unit trace.
    pub state: DMatrix<f64>,
    /// Independently computed product the rebuild must be proportional to.
    pub direct: DMatrix<f64>,
    /// Relative Frobenius deviation of `raw` from the best multiple of `direct`.
    pub deviation: f64,
}

/// Largest `gamma` that keeps every rotation `gamma * f(lambda)` inside the
/// arcsin domain, times 0.9.
pub fn default_gamma(kind: SpectralKind, eigvals: &[f64]) -> f64 {
    let peak = eigvals.iter().map(|&l| rotation(kind, l).abs()).fold(0.0, f64::max);
    if peak > 0.0 {
        0.9 / peak
    } else {
        1.0
    }
}

fn rotation(kind: SpectralKind, lambda: f64) -> f64 {
    match kind {
        SpectralKind::A | SpectralKind::B => lambda,
        SpectralKind::G => lambda.powf(-0.5),
    }
}

/// Rebuild `rho_X` from `sum_ij gamma^2 f(l_i) f(l_j) <u_i|rho|u_j> |u_i><u_j|`.
///
/// For `B` and `A`, `reference` is `K` and `inner` is `M` or `L`. For `G`,
/// `reference` is the ridged alignment matrix `A` and `inner` is `K M K`.
pub fn spectral_rebuild(
    kind: SpectralKind,
    reference: &DMatrix<f64>,
    inner: &DMatrix<f64>,
    gamma: Option<f64>,
) -> Result<SpectralBuild> {
    let n = linalg::require_square(reference, "reference matrix")?;
    if inner.shape() != reference.shape() {
        return Err(Error::Dimension(format!(
            "reference is {n}x{n} but inner matrix is {}x{}",
            inner.nrows(),
            inner.ncols()
        )));
    }
    linalg::require_finite(reference, "reference matrix")?;
    linalg::require_finite(inner, "inner matrix")?;
    let asym = linalg::max_asymmetry(reference);
    if asym > 1e-10 * linalg::frobenius(reference).max(1.0) {
        return Err(Error::Input(format!("reference matrix is not symmetric ({asym:.2e})")));
    }
    let eig = sym_eigen(reference);
    if kind == SpectralKind::G {
        let lo = eig.values[0];
        let hi = eig.values[n - 1];
        if lo <= hi.abs() * 1e-14 {
            return Err(Error::Singular {
                condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
                context: "alignment matrix is not positive definite".into(),
            });
        }
    }
    let gamma = match gamma {
        Some(g) => g,
        None => default_gamma(kind, &eig.values),
    };
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
    }
    let f: Vec<f64> = eig.values.iter().map(|&l| gamma * rotation(kind, l)).collect();
    if let Some(bad) = f.iter().find(|v| v.abs() > 1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "rotation amplitude {bad} leaves the arcsin domain; lower gamma"
        )));
    }

    let u = &eig.vectors;
    let coeffs = u.transpose() * inner * u;
    let scaled = DMatrix::from_fn(n, n, |i, j| f[i] * f[j] * coeffs[(i, j)]);
    let raw = linalg::symmetrize(&(u * scaled * u.transpose()));
    let in_trace = inner.trace();
    let success_prob = if in_trace != 0.0 { raw.trace() / in_trace } else { 0.0 };
    let pair_normalizer: f64 = f.iter().map(|a| f.iter().map(|b| (a * b).powi(2)).sum::<f64>()).sum();
    let state = if raw.trace() != 0.0 {
        &raw / raw.trace()
    } else {
        raw.clone()
    };

    let direct = match kind {
        SpectralKind::A | SpectralKind::B => reference * inner * reference,
        SpectralKind::G => {
            let (_, inv_root) = denman_beavers(reference)?;
            &inv_root * inner * &inv_root
        }
    };
    let (deviation, _) = linalg::proportionality_residual(&raw, &direct);
    Ok(SpectralBuild {
        kind,
        basis: eig.vectors,
        eigvals: eig.values,
        gamma,
        success_prob,
        pair_normalizer,
        raw,
        state,
        direct,
        deviation,
    })
}

/// `(A^1/2, A^-1/2)` by the coupled Denman-Beavers iteration. Uses only
/// inverses, so it serves as an eigen-free check on the spectral rebuild.
pub fn denman_beavers(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = linalg::require_square(a, "A")?;
    // scale to unit norm for faster, better-conditioned convergence
    let s = linalg::frobenius(a);
    if s == 0.0 {
        return Err(Error::Singular {
            condition: f64::INFINITY,
            context: "zero matrix has no inverse square root".into(),
        });
    }
    let mut y = a / s;
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let singular = || Error::Singular {
            condition: f64::INFINITY,
            context: "Denman-Beavers iterate lost invertibility".into(),
        };
        let yi = y.clone().try_inverse().ok_or_else(singular)?;
        let zi = z.clone().try_inverse().ok_or_else(singular)?;
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let change = linalg::frobenius(&(&y_next - &y)) / linalg::frobenius(&y_next);
        y = y_next;
        z = z_next;
        if change < 1e-15 {
            break;
        }
    }
    // undo the scaling: sqrt(s A') = sqrt(s) sqrt(A')
    let r = s.sqrt();
    Ok((y * r, z / r))
}
