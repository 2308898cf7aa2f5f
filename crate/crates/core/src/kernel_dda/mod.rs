//! Kernel and MMD linear algebra plus the classical distribution-alignment
//! loop (TCA, JDA and BDA variants).
//!
//! Samples are stored as columns of a [`DataMatrix`], source block first. The
//! alignment problem is solved in kernel space: with `K` the Gram matrix,
//! `L_Q` the weighted MMD matrix and `M` the centering matrix, the projection
//! `W` (n x d) holds the `d` smallest generalized eigenvectors of
//! `(K L_Q K + mu I) w = lambda K M K w` and the embedded data is `Z = W^T K`.

mod dda;
mod eigen;
mod kernel;
mod knn;
mod mmd;

pub(crate) use dda::{centered_kk, pooled_labels, weighted_klk};
pub use dda::{
    dda_fit_predict, dda_fit_predict_observed, no_adaptation, DdaConfig, DdaOutcome, DdaVariant, IterationRecord,
};
pub use eigen::{solve_generalized_eigen, solve_generalized_eigen_selected, EigenSelection, GeneralizedEigen};
pub use kernel::{compute_kernel, median_bandwidth, Bandwidth, KernelKind, KernelSpec};
pub use knn::{knn_predict, knn_predict_with};
pub use mmd::{build_mmd_matrices, direct_mmd, mmd_trace, KernelBundle, MmdMatrices};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Feature matrix with one sample per column; the first `n_source` columns
/// belong to the source domain, the remaining `n_target` to the target.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    n_source: usize,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, n_source: usize) -> Result<Self> {
        if n_source == 0 || n_source >= values.ncols() {
            return Err(Error::Input(format!(
                "need at least one source and one target column, got n_s={n_source} of n={}",
                values.ncols()
            )));
        }
        if values.nrows() == 0 {
            return Err(Error::Input("data matrix has zero feature rows".into()));
        }
        crate::linalg::require_finite(&values, "data matrix")?;
        Ok(Self { values, n_source })
    }

    /// Stack a source and a target block column-wise.
    pub fn from_domains(source: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<Self> {
        if source.nrows() != target.nrows() {
            return Err(Error::Dimension(format!(
                "source has {} features, target has {}",
                source.nrows(),
                target.nrows()
            )));
        }
        let mut values = DMatrix::zeros(source.nrows(), source.ncols() + target.ncols());
        values.columns_mut(0, source.ncols()).copy_from(source);
        values.columns_mut(source.ncols(), target.ncols()).copy_from(target);
        Self::new(values, source.ncols())
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_source(&self) -> usize {
        self.n_source
    }

    pub fn n_target(&self) -> usize {
        self.values.ncols() - self.n_source
    }

    pub fn source(&self) -> DMatrix<f64> {
        self.values.columns(0, self.n_source).into_owned()
    }

    pub fn target(&self) -> DMatrix<f64> {
        self.values.columns(self.n_source, self.n_target()).into_owned()
    }
}

/// Class labels `0..n_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::Input("label vector needs at least one class".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Input(format!("label {bad} outside 0..{n_classes}")));
        }
        Ok(Self { labels, n_classes })
    }

    /// Infer the class count as `max + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, n_classes)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Number of positions where `self` and `other` disagree.
    pub fn changes_from(&self, other: &LabelVector) -> usize {
        self.labels
            .iter()
            .zip(other.labels.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Projection learned by an alignment run.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// n x d transformation in kernel space.
    pub w: DMatrix<f64>,
    /// Ascending generalized eigenvalues matching the columns of `w`.
    pub eigvals: Vec<f64>,
    /// d x n embedded data, `W^T K`.
    pub z: DMatrix<f64>,
    pub iterations_used: usize,
}

/// `Z = W^T K`, one embedded column per input sample.
pub fn embed(k: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if w.nrows() != k.nrows() {
        return Err(Error::Dimension(format!(
            "W has {} rows but K is {}x{}",
            w.nrows(),
            k.nrows(),
            k.ncols()
        )));
    }
    Ok(w.transpose() * k)
}
