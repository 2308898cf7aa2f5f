use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::eigen::{solve_generalized_eigen_selected, EigenSelection};
use super::kernel::{compute_kernel, KernelSpec};
use super::knn::knn_predict;
use super::mmd::{conditional_vector, marginal_vector};
use super::{embed, DataMatrix, LabelVector, ProjectionResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdaVariant {
    /// Marginal alignment only.
    Tca,
    /// Marginal plus conditional terms with unit weights each.
    Jda,
    /// `(1 - kappa)` marginal plus `kappa` conditional.
    Bda,
}

impl DdaVariant {
    /// Weights on `L0` and on `sum_c Lc`.
    pub fn weights(self, kappa: f64) -> (f64, f64) {
        match self {
            DdaVariant::Tca => (1.0, 0.0),
            DdaVariant::Jda => (1.0, 1.0),
            DdaVariant::Bda => (1.0 - kappa, kappa),
        }
    }

    pub fn effective_kappa(self, kappa: f64) -> f64 {
        match self {
            DdaVariant::Tca => 0.0,
            DdaVariant::Jda => 0.5,
            DdaVariant::Bda => kappa,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DdaConfig {
    pub variant: DdaVariant,
    pub kernel: KernelSpec,
    /// Balance factor; only read by the BDA variant.
    pub kappa: f64,
    pub mu: f64,
    pub d: usize,
    pub iterations: usize,
    pub selection: EigenSelection,
    pub knn_k: usize,
}

impl Default for DdaConfig {
    fn default() -> Self {
        Self {
            variant: DdaVariant::Bda,
            kernel: KernelSpec::default(),
            kappa: 0.5,
            mu: 1.0,
            d: 2,
            iterations: 10,
            selection: EigenSelection::Smallest,
            knn_k: 1,
        }
    }
}

impl DdaConfig {
    pub fn with_variant(variant: DdaVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::Parameter(format!(
                "kappa must lie in [0, 1], got {}",
                self.kappa
            )));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::Parameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        if self.d == 0 || self.d > n {
            return Err(Error::Parameter(format!("need 1 <= d <= {n}, got {}", self.d)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Target labels that changed relative to the previous iteration.
    pub label_changes: usize,
    /// `tr(W^T (K L_Q K + mu I) W)` for the solved projection.
    pub objective: f64,
    pub eigvals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DdaOutcome {
    pub labels: LabelVector,
    /// `None` when zero iterations were requested.
    pub projection: Option<ProjectionResult>,
    pub history: Vec<IterationRecord>,
}

/// `K L K` for `L = marginal_weight * l0 l0^T + conditional_weight * sum_c lc lc^T`
/// as a sum of rank-one terms.
pub(crate) fn weighted_klk(
    k: &DMatrix<f64>,
    n_s: usize,
    labels: Option<&LabelVector>,
    marginal_weight: f64,
    conditional_weight: f64,
    n_classes: usize,
) -> DMatrix<f64> {
    let n = k.nrows();
    let mut out = DMatrix::zeros(n, n);
    let mut add = |v: DVector<f64>, weight: f64| {
        if weight != 0.0 {
            let kv = k * v;
            out.ger(weight, &kv, &kv, 1.0);
        }
    };
    add(marginal_vector(n_s, n - n_s), marginal_weight);
    if let Some(labels) = labels {
        for c in 0..n_classes {
            add(conditional_vector(labels.as_slice(), n_s, c), conditional_weight);
        }
    }
    out
}

/// `K M K` without forming `M`.
pub(crate) fn centered_kk(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let mut out = k * k;
    let ones = DVector::from_element(n, 1.0);
    let k1 = k * ones;
    out.ger(-1.0 / n as f64, &k1, &k1, 1.0);
    crate::linalg::symmetrize(&out)
}

pub(crate) fn pooled_labels(y_s: &LabelVector, y_t: &LabelVector) -> Result<LabelVector> {
    let mut all = y_s.as_slice().to_vec();
    all.extend_from_slice(y_t.as_slice());
    LabelVector::new(all, y_s.n_classes().max(y_t.n_classes()))
}

/// Raw-feature 1-NN predictions, the no-adaptation baseline.
pub fn no_adaptation(x: &DataMatrix, y_s: &LabelVector, k: usize) -> Result<LabelVector> {
    knn_predict(&x.source(), y_s, &x.target(), k)
}

pub fn dda_fit_predict(x: &DataMatrix, y_s: &LabelVector, config: &DdaConfig) -> Result<DdaOutcome> {
    dda_fit_predict_observed(x, y_s, config, |_, _| {})
}

/// Alternate between solving the alignment eigenproblem and refreshing the
/// target pseudo labels. `observer` sees every iteration's record and labels.
///
/// Stops early once an iteration leaves every pseudo label unchanged, since
/// the loop is deterministic from then on.
pub fn dda_fit_predict_observed(
    x: &DataMatrix,
    y_s: &LabelVector,
    config: &DdaConfig,
    mut observer: impl FnMut(&IterationRecord, &LabelVector),
) -> Result<DdaOutcome> {
    let n = x.n();
    let n_s = x.n_source();
    if y_s.len() != n_s {
        return Err(Error::Dimension(format!(
            "{n_s} source columns but {} labels",
            y_s.len()
        )));
    }
    config.validate(n)?;

    let mut labels = no_adaptation(x, y_s, config.knn_k)?;
    let mut history = Vec::new();
    if config.iterations == 0 {
        return Ok(DdaOutcome {
            labels,
            projection: None,
            history,
        });
    }

    let k = compute_kernel(x, &config.kernel)?;
    let b = centered_kk(&k);
    let (w0, wc) = config.variant.weights(config.kappa);
    let n_classes = y_s.n_classes();
    let mut projection = None;

    for iter in 1..=config.iterations {
        let pooled = pooled_labels(y_s, &labels)?;
        let mut a = weighted_klk(&k, n_s, Some(&pooled), w0, wc, n_classes);
        for i in 0..n {
            a[(i, i)] += config.mu;
        }
        let eig = solve_generalized_eigen_selected(&a, &b, config.d, config.selection)?;
        let z = embed(&k, &eig.vectors)?;
        let z_s = z.columns(0, n_s).into_owned();
        let z_t = z.columns(n_s, n - n_s).into_owned();
        let next = knn_predict(&z_s, y_s, &z_t, config.knn_k)?;

        let objective = (eig.vectors.transpose() * &a * &eig.vectors).trace();
        let record = IterationRecord {
            iter,
            label_changes: next.changes_from(&labels),
            objective,
            eigvals: eig.values.clone(),
        };
        observer(&record, &next);
        let stable = record.label_changes == 0;
        history.push(record);
        labels = next;
        projection = Some(ProjectionResult {
            w: eig.vectors,
            eigvals: eig.values,
            z,
            iterations_used: iter,
        });
        if stable {
            break;
        }
    }

    Ok(DdaOutcome {
        labels,
        projection,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::super::mmd::build_mmd_matrices;
    use super::*;

    fn toy(shift: f64) -> (DataMatrix, LabelVector, Vec<usize>) {
        // two clusters per domain on the plane, target shifted
        let mut cols = Vec::new();
        let mut ys = Vec::new();
        for dom in 0..2 {
            for i in 0..8 {
                let c = i % 2;
                let base = if c == 0 { -1.0 } else { 1.0 };
                let jitter = 0.05 * (i as f64 - 3.5);
                let off = if dom == 1 { shift } else { 0.0 };
                cols.extend_from_slice(&[base + jitter + off, 0.3 * jitter + off]);
                ys.push(c);
            }
        }
        let x = DataMatrix::new(DMatrix::from_column_slice(2, 16, &cols), 8).unwrap();
        let y_s = LabelVector::new(ys[..8].to_vec(), 2).unwrap();
        (x, y_s, ys[8..].to_vec())
    }

    #[test]
    fn rank_one_objective_matches_dense_product() {
        let (x, y_s, truth) = toy(0.3);
        let k = compute_kernel(&x, &KernelSpec::rbf(1.0)).unwrap();
        let labels = pooled_labels(&y_s, &LabelVector::new(truth, 2).unwrap()).unwrap();
        let mats = build_mmd_matrices(8, 8, Some(&labels), 0.4, 2).unwrap();
        let dense = &k * &mats.l_q * &k;
        let fast = weighted_klk(&k, 8, Some(&labels), 0.6, 0.4, 2);
        assert!((dense - fast).amax() < 1e-12);
        let kmk = &k * &mats.m * &k;
        assert!((kmk - centered_kk(&k)).amax() < 1e-12);
    }

    #[test]
    fn zero_iterations_returns_no_adaptation() {
        let (x, y_s, _) = toy(0.5);
        let cfg = DdaConfig {
            iterations: 0,
            ..DdaConfig::default()
        };
        let out = dda_fit_predict(&x, &y_s, &cfg).unwrap();
        assert_eq!(out.labels, no_adaptation(&x, &y_s, 1).unwrap());
        assert!(out.projection.is_none() && out.history.is_empty());
    }

    #[test]
    fn identical_domains_are_perfect() {
        let (x, y_s, truth) = toy(0.0);
        for variant in [DdaVariant::Tca, DdaVariant::Jda, DdaVariant::Bda] {
            let out = dda_fit_predict(&x, &y_s, &DdaConfig::with_variant(variant)).unwrap();
            assert_eq!(out.labels.as_slice(), truth.as_slice(), "{variant:?}");
        }
    }

    #[test]
    fn projection_is_b_orthonormal() {
        let (x, y_s, _) = toy(0.4);
        let out = dda_fit_predict(&x, &y_s, &DdaConfig::default()).unwrap();
        let p = out.projection.unwrap();
        let k = compute_kernel(&x, &DdaConfig::default().kernel).unwrap();
        let gram = p.w.transpose() * centered_kk(&k) * &p.w;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-6);
        assert!(p.eigvals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn marginal_objective_not_above_unprojected_mmd() {
        let (x, y_s, _) = toy(0.0);
        let cfg = DdaConfig {
            variant: DdaVariant::Tca,
            iterations: 1,
            ..DdaConfig::default()
        };
        let out = dda_fit_predict(&x, &y_s, &cfg).unwrap();
        let k = compute_kernel(&x, &cfg.kernel).unwrap();
        let l0 = build_mmd_matrices(8, 8, None, 0.0, 1).unwrap().l0;
        let w = out.projection.unwrap().w;
        let projected = (w.transpose() * &k * &l0 * &k * &w).trace();
        assert!(projected <= super::super::mmd_trace(&k, &l0).unwrap() + 1e-12);
    }

    #[test]
    fn labels_fixed_point_is_stable() {
        let (x, y_s, _) = toy(0.6);
        let short = dda_fit_predict(
            &x,
            &y_s,
            &DdaConfig {
                iterations: 3,
                ..DdaConfig::default()
            },
        )
        .unwrap();
        let long = dda_fit_predict(
            &x,
            &y_s,
            &DdaConfig {
                iterations: 12,
                ..DdaConfig::default()
            },
        )
        .unwrap();
        if short.history.last().map(|r| r.label_changes) == Some(0) {
            assert_eq!(short.labels, long.labels);
        }
        // every iteration after the first zero-change record is absent
        let first_zero = long.history.iter().position(|r| r.label_changes == 0);
        if let Some(p) = first_zero {
            assert_eq!(p + 1, long.history.len());
        }
    }
}
