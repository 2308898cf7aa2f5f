use nalgebra::DMatrix;

use super::{column, train_binary, BinaryVqcModel, TrainConfig};
use crate::error::{Error, Result};
use crate::kernel_dda::LabelVector;
use crate::qsim::{qubits_for, AnsatzCircuit};

/// Per-feature standardization fitted on the source embedding, followed by
/// a constant feature. Without the constant, amplitude encoding would map
/// `z` and `-z` to the same measurement statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Appended entry; `0.0` disables it.
    pub constant: f64,
}

impl FeatureMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
            constant: 0.0,
        }
    }

    /// Mean and standard deviation of each row of `z` (samples as columns).
    pub fn fit(z: &DMatrix<f64>, standardize: bool, constant: f64) -> Self {
        let d = z.nrows();
        if !standardize {
            return Self {
                constant,
                ..Self::identity(d)
            };
        }
        let n = z.ncols().max(1) as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for r in 0..d {
            let row = z.row(r);
            let m = row.sum() / n;
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean[r] = m;
            if var.sqrt() > 1e-12 {
                scale[r] = var.sqrt();
            }
        }
        Self { mean, scale, constant }
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.mean.len() + usize::from(self.constant != 0.0)
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "feature map expects {} features, got {}",
                self.mean.len(),
                z.len()
            )));
        }
        let mut out: Vec<f64> = z
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        if self.constant != 0.0 {
            out.push(self.constant);
        }
        Ok(out)
    }

    fn apply_columns(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d = self.output_dim();
        let mut out = DMatrix::zeros(d, z.ncols());
        for j in 0..z.ncols() {
            let v = self.apply(&column(z, j))?;
            out.column_mut(j).copy_from_slice(&v);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub feature_map: FeatureMap,
    /// Label order; stage `k` separates `class_order[k]` from the classes after it.
    pub class_order: Vec<usize>,
    pub stages: Vec<BinaryVqcModel>,
}

impl CascadeModel {
    pub fn n_classes(&self) -> usize {
        self.class_order.len()
    }

    pub fn residual_class(&self) -> usize {
        *self.class_order.last().expect("cascade has at least two classes")
    }

    /// Classes whose stage fell back to a constant predictor.
    pub fn flagged_stages(&self) -> Vec<usize> {
        self.stages
            .iter()
            .filter(|s| s.constant.is_some())
            .map(|s| s.class_id)
            .collect()
    }
}

/// Constant feature used by [`fit_cascade`]. Large next to the standardized
/// features, so the readout probability is close to linear in `z`.
pub const FEATURE_CONSTANT: f64 = 8.0;

/// Train the `C - 1` stages in ascending class order. Stage `k` sees only the
/// samples whose labels are in `class_order[k..]`.
pub fn fit_cascade(z_s: &DMatrix<f64>, y_s: &LabelVector, cfg: &TrainConfig) -> Result<CascadeModel> {
    fit_cascade_with(z_s, y_s, cfg, true, FEATURE_CONSTANT)
}

/// [`fit_cascade`] with explicit feature-map settings.
pub fn fit_cascade_with(
    z_s: &DMatrix<f64>,
    y_s: &LabelVector,
    cfg: &TrainConfig,
    standardize: bool,
    constant: f64,
) -> Result<CascadeModel> {
    cfg.validate()?;
    let c = y_s.n_classes();
    if c < 2 {
        return Err(Error::Input("cascade needs at least two classes".into()));
    }
    if z_s.ncols() != y_s.len() {
        return Err(Error::Dimension(format!(
            "{} source columns but {} labels",
            z_s.ncols(),
            y_s.len()
        )));
    }
    let feature_map = FeatureMap::fit(z_s, standardize, constant);
    let x = feature_map.apply_columns(z_s)?;
    let class_order: Vec<usize> = (0..c).collect();
    let qubits = qubits_for(x.nrows());
    let mut stages = Vec::with_capacity(c - 1);
    for k in 0..c - 1 {
        let class_id = class_order[k];
        let pool: Vec<usize> = (0..y_s.len())
            .filter(|&j| class_order[k..].contains(&y_s.get(j)))
            .collect();
        let positives = pool.iter().filter(|&&j| y_s.get(j) == class_id).count();
        if positives == 0 || positives == pool.len() {
            log::warn!(
                "cascade stage {k} (class {class_id}) has {positives} positives in a pool of {}; using a constant predictor",
                pool.len()
            );
            stages.push(BinaryVqcModel {
                class_id,
                circuit: AnsatzCircuit::zeros(qubits, cfg.layers, cfg.entangler)?,
                bias: 0.0,
                threshold: if pool.is_empty() {
                    0.0
                } else {
                    positives as f64 / pool.len() as f64
                },
                constant: Some(positives > 0),
                loss_trace: vec![],
            });
            continue;
        }
        let xs = DMatrix::from_fn(x.nrows(), pool.len(), |r, i| x[(r, pool[i])]);
        let ys = LabelVector::new(pool.iter().map(|&j| y_s.get(j)).collect(), c)?;
        let model = train_binary(&xs, &ys, class_id, cfg)?;
        log::debug!(
            "stage {k}: class {class_id}, pool {}, loss {:.4} -> {:.4}",
            pool.len(),
            model.loss_trace[0],
            model.loss_trace.last().copied().unwrap_or(f64::NAN)
        );
        stages.push(model);
    }
    Ok(CascadeModel {
        feature_map,
        class_order,
        stages,
    })
}

/// Route each column of `z_t` through the stages; the first stage that
/// fires assigns its class, survivors get the residual class.
pub fn predict_cascade(model: &CascadeModel, z_t: &DMatrix<f64>) -> Result<LabelVector> {
    let residual = model.residual_class();
    let mut out = Vec::with_capacity(z_t.ncols());
    for j in 0..z_t.ncols() {
        let x = model.feature_map.apply(&column(z_t, j))?;
        let mut label = residual;
        for stage in &model.stages {
            if stage.fires(&x)? {
                label = stage.class_id;
                break;
            }
        }
        out.push(label);
    }
    LabelVector::new(out, model.n_classes())
}
