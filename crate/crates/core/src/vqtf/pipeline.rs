use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hamiltonian::embed_pair;
use super::solver::{solve_eigenstates_from, EigenSolverConfig, LevelReport};
use crate::error::{Error, Result};
use crate::kernel_dda::{
    centered_kk, compute_kernel, embed, knn_predict, no_adaptation, pooled_labels, weighted_klk, DataMatrix,
    DdaVariant, KernelSpec, LabelVector,
};
use crate::vq_classifier::{fit_cascade, predict_cascade, CascadeModel, TrainConfig};

/// Classifier that turns the embedded source data into target pseudo labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    #[default]
    Cascade,
    Knn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VqtfConfig {
    pub kernel: KernelSpec,
    /// Weighting of the marginal and conditional MMD terms in `L_Q`.
    pub variant: DdaVariant,
    pub kappa: f64,
    pub mu: f64,
    pub iterations: usize,
    pub solver: EigenSolverConfig,
    pub classifier: TrainConfig,
    pub predictor: Predictor,
    pub knn_k: usize,
    /// Start each outer iteration from the previous iteration's parameters.
    pub warm_start: bool,
}

impl Default for VqtfConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            variant: DdaVariant::Bda,
            kappa: 0.5,
            mu: 1.0,
            iterations: 5,
            solver: EigenSolverConfig::default(),
            classifier: TrainConfig::default(),
            predictor: Predictor::Cascade,
            knn_k: 1,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VqtfIteration {
    pub iter: usize,
    pub label_changes: usize,
    pub eigvals: Vec<f64>,
    pub levels: Vec<LevelReport>,
}

/// One line of the diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub iter: usize,
    pub level: usize,
    pub final_loss: f64,
    pub rayleigh: f64,
    pub label_change_count: usize,
}

#[derive(Debug, Clone)]
pub struct VqtfOutcome {
    pub labels: LabelVector,
    pub history: Vec<VqtfIteration>,
    /// Projection and embedding from the last iteration.
    pub w: Option<DMatrix<f64>>,
    pub z: Option<DMatrix<f64>>,
    pub cascade: Option<CascadeModel>,
}

impl VqtfOutcome {
    pub fn diagnostics(&self) -> Vec<DiagnosticRecord> {
        diagnostics(&self.history)
    }
}

pub fn diagnostics(history: &[VqtfIteration]) -> Vec<DiagnosticRecord> {
    history
        .iter()
        .flat_map(|it| {
            it.levels.iter().map(move |l| DiagnosticRecord {
                iter: it.iter,
                level: l.level,
                final_loss: l.final_loss,
                rayleigh: l.rayleigh,
                label_change_count: it.label_changes,
            })
        })
        .collect()
}

/// Diagnostics as JSON lines.
pub fn diagnostics_jsonl(history: &[VqtfIteration]) -> Result<String> {
    let mut out = String::new();
    for r in diagnostics(history) {
        out.push_str(&serde_json::to_string(&r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn vqtf_fit_predict(x: &DataMatrix, y_s: &LabelVector, cfg: &VqtfConfig) -> Result<VqtfOutcome> {
    vqtf_fit_predict_observed(x, y_s, cfg, |_, _| {})
}

/// Alternate: rebuild `L_Q` from the pseudo labels, solve the eigenstates
/// variationally, embed, train the predictor on the source block and relabel
/// the target block. Stops when the labels stop changing.
pub fn vqtf_fit_predict_observed(
    x: &DataMatrix,
    y_s: &LabelVector,
    cfg: &VqtfConfig,
    mut observer: impl FnMut(&VqtfIteration, &LabelVector),
) -> Result<VqtfOutcome> {
    let n = x.n();
    let n_s = x.n_source();
    if y_s.len() != n_s {
        return Err(Error::Dimension(format!(
            "{n_s} source columns but {} labels",
            y_s.len()
        )));
    }
    if !(0.0..=1.0).contains(&cfg.kappa) || !(cfg.mu >= 0.0) {
        return Err(Error::Parameter("kappa must lie in [0, 1] and mu must be >= 0".into()));
    }
    cfg.solver.validate(n)?;

    let mut labels = no_adaptation(x, y_s, cfg.knn_k)?;
    let mut outcome = VqtfOutcome {
        labels: labels.clone(),
        history: Vec::new(),
        w: None,
        z: None,
        cascade: None,
    };
    if cfg.iterations == 0 {
        return Ok(outcome);
    }
    let k = compute_kernel(x, &cfg.kernel)?;
    let b = centered_kk(&k);
    let (w0, wc) = cfg.variant.weights(cfg.kappa);
    let n_classes = y_s.n_classes();
    let mut warm: Vec<Vec<f64>> = Vec::new();

    for iter in 1..=cfg.iterations {
        let pooled = pooled_labels(y_s, &labels)?;
        let mut a = weighted_klk(&k, n_s, Some(&pooled), w0, wc, n_classes);
        for i in 0..n {
            a[(i, i)] += cfg.mu;
        }
        let pair = embed_pair(&a, &b, None)?;
        let mut solver_cfg = cfg.solver;
        solver_cfg.seed = cfg.solver.seed.wrapping_add(iter as u64 * 7919);
        let sol = solve_eigenstates_from(&pair, &solver_cfg, &warm)?;
        if cfg.warm_start {
            warm = sol.levels.iter().map(|l| l.theta.clone()).collect();
        }
        let z = embed(&k, &sol.w)?;
        let z_s = z.columns(0, n_s).into_owned();
        let z_t = z.columns(n_s, n - n_s).into_owned();
        let (next, cascade) = match cfg.predictor {
            Predictor::Cascade => {
                let m = fit_cascade(&z_s, y_s, &cfg.classifier)?;
                (predict_cascade(&m, &z_t)?, Some(m))
            }
            Predictor::Knn => (knn_predict(&z_s, y_s, &z_t, cfg.knn_k)?, None),
        };
        let record = VqtfIteration {
            iter,
            label_changes: next.changes_from(&labels),
            eigvals: sol.eigvals.clone(),
            levels: sol.levels,
        };
        log::info!(
            "vqtf iteration {iter}: eigvals {:?}, {} label changes",
            record.eigvals,
            record.label_changes
        );
        observer(&record, &next);
        let stable = record.label_changes == 0;
        outcome.history.push(record);
        labels = next;
        outcome.w = Some(sol.w);
        outcome.z = Some(z);
        outcome.cascade = cascade;
        if stable {
            break;
        }
    }
    outcome.labels = labels;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_dda::{dda_fit_predict, DdaConfig};
    use crate::linalg::sym_eigen;

    fn toy(shift: f64) -> (DataMatrix, LabelVector, Vec<usize>) {
        let mut cols = Vec::new();
        let mut ys = Vec::new();
        for dom in 0..2 {
            for i in 0..8 {
                let c = i % 2;
                let base = if c == 0 { -1.0 } else { 1.0 };
                let jitter = 0.05 * (i as f64 - 3.5);
                let off = if dom == 1 { shift } else { 0.0 };
                cols.extend_from_slice(&[base + jitter + off, 0.3 * jitter - off]);
                ys.push(c);
            }
        }
        let x = DataMatrix::new(DMatrix::from_column_slice(2, 16, &cols), 8).unwrap();
        let y_s = LabelVector::new(ys[..8].to_vec(), 2).unwrap();
        (x, y_s, ys[8..].to_vec())
    }

    fn fast_cfg() -> VqtfConfig {
        let mut cfg = VqtfConfig::default();
        cfg.solver.epochs = 300;
        cfg.classifier.epochs = 100;
        cfg.iterations = 2;
        cfg
    }

    #[test]
    fn identical_domains_are_perfect() {
        let (x, y_s, truth) = toy(0.0);
        let out = vqtf_fit_predict(&x, &y_s, &fast_cfg()).unwrap();
        assert_eq!(out.labels.as_slice(), truth.as_slice());
        assert!(!out.history.is_empty());
    }

    #[test]
    fn zero_iterations_is_no_adaptation() {
        let (x, y_s, _) = toy(0.3);
        let cfg = VqtfConfig {
            iterations: 0,
            ..fast_cfg()
        };
        let out = vqtf_fit_predict(&x, &y_s, &cfg).unwrap();
        assert_eq!(out.labels, no_adaptation(&x, &y_s, 1).unwrap());
        assert!(out.history.is_empty() && out.w.is_none());
    }

    #[test]
    fn single_iteration_agrees_with_classical_pipeline() {
        let (x, y_s, _) = toy(0.4);
        let mut cfg = fast_cfg();
        cfg.iterations = 1;
        cfg.predictor = Predictor::Knn;
        cfg.solver.layers = 6;
        let quantum = vqtf_fit_predict(&x, &y_s, &cfg).unwrap();
        let classical = dda_fit_predict(
            &x,
            &y_s,
            &DdaConfig {
                iterations: 1,
                ..DdaConfig::default()
            },
        )
        .unwrap();
        let agree = quantum
            .labels
            .as_slice()
            .iter()
            .zip(classical.labels.as_slice())
            .filter(|(a, b)| a == b)
            .count();
        assert!(agree as f64 / 8.0 >= 0.95, "{agree}/8 agree");
    }

    #[test]
    fn levels_are_deflated_and_bounded_below() {
        let (x, y_s, _) = toy(0.4);
        let cfg = VqtfConfig {
            iterations: 1,
            ..fast_cfg()
        };
        let out = vqtf_fit_predict(&x, &y_s, &cfg).unwrap();
        let k = compute_kernel(&x, &cfg.kernel).unwrap();
        let pooled = pooled_labels(&y_s, &no_adaptation(&x, &y_s, 1).unwrap()).unwrap();
        let (w0, wc) = cfg.variant.weights(cfg.kappa);
        let a = weighted_klk(&k, 8, Some(&pooled), w0, wc, 2) + DMatrix::identity(16, 16) * cfg.mu;
        let b = centered_kk(&k);
        // lambda_min of the pencil through a shifted B so the oracle is well posed
        let b_reg = &b + DMatrix::identity(16, 16) * 1e-9 * b.trace();
        let l = b_reg.cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let lam_min = sym_eigen(&(&li * &a * li.transpose())).values[0];
        for level in &out.history[0].levels {
            assert!(
                level.max_b_cosine <= 0.05,
                "level {} cosine {}",
                level.level,
                level.max_b_cosine
            );
            assert!(level.rayleigh >= lam_min - 1e-6 * lam_min.abs().max(1.0));
        }
    }

    #[test]
    fn diagnostics_have_one_record_per_level() {
        let (x, y_s, _) = toy(0.4);
        let out = vqtf_fit_predict(&x, &y_s, &fast_cfg()).unwrap();
        let recs = out.diagnostics();
        assert_eq!(recs.len(), out.history.len() * 2);
        let text = diagnostics_jsonl(&out.history).unwrap();
        let first: DiagnosticRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, recs[0]);
    }
}
