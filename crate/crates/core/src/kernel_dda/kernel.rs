use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DataMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise Euclidean distance over a seeded subsample of at most
    /// 1000 pairs.
    MedianHeuristic {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: Bandwidth,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            bandwidth: Bandwidth::MedianHeuristic { seed: 0 },
        }
    }

    pub fn rbf(sigma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            bandwidth: Bandwidth::Fixed(sigma),
        }
    }

    pub fn rbf_median(seed: u64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            bandwidth: Bandwidth::MedianHeuristic { seed },
        }
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::rbf_median(0)
    }
}

const MEDIAN_PAIRS: usize = 1000;

pub fn median_bandwidth(x: &DMatrix<f64>, seed: u64) -> f64 {
    let n = x.ncols();
    let total = n * n.saturating_sub(1) / 2;
    let mut dists = Vec::with_capacity(total.min(MEDIAN_PAIRS));
    if total <= MEDIAN_PAIRS {
        for i in 0..n {
            for j in (i + 1)..n {
                dists.push(crate::linalg::squared_distance(x, i, x, j).sqrt());
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while dists.len() < MEDIAN_PAIRS {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                dists.push(crate::linalg::squared_distance(x, i, x, j).sqrt());
            }
        }
    }
    if dists.is_empty() {
        return 0.0;
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    }
}

/// Gram matrix over the columns of `x`.
pub fn compute_kernel(x: &DataMatrix, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    gram(x.values(), spec)
}

pub(crate) fn gram(values: &DMatrix<f64>, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    if values.ncols() == 0 {
        return Err(Error::Input("kernel over an empty sample set".into()));
    }
    crate::linalg::require_finite(values, "kernel input")?;
    let dots = values.transpose() * values;
    let n = dots.nrows();
    match spec.kind {
        KernelKind::Linear => Ok(crate::linalg::symmetrize(&dots)),
        KernelKind::Rbf => {
            let sigma = match spec.bandwidth {
                Bandwidth::Fixed(s) => s,
                Bandwidth::MedianHeuristic { seed } => median_bandwidth(values, seed),
            };
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::Parameter(format!(
                    "rbf bandwidth must be positive and finite, got {sigma}"
                )));
            }
            let denom = 2.0 * sigma * sigma;
            let mut k = DMatrix::zeros(n, n);
            for i in 0..n {
                k[(i, i)] = 1.0;
                for j in (i + 1)..n {
                    let sq = (dots[(i, i)] + dots[(j, j)] - 2.0 * dots[(i, j)]).max(0.0);
                    let v = (-sq / denom).exp();
                    k[(i, j)] = v;
                    k[(j, i)] = v;
                }
            }
            Ok(k)
        }
    }
}
