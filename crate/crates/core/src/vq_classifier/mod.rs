//! Variational cascade classifier: `C - 1` binary circuits, each separating
//! one class from every class after it in a fixed order.
//!
//! A binary stage scores a sample by running the ansatz on its amplitude
//! encoding and reading the probability that qubit 0 is `|1>`, plus a
//! trainable bias. The stage fires when the score exceeds the positive rate
//! of its training pool.

mod cascade;
mod io;

pub use cascade::{fit_cascade, fit_cascade_with, predict_cascade, CascadeModel, FeatureMap, FEATURE_CONSTANT};
pub use io::{read_cascade, write_cascade};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_dda::LabelVector;
use crate::optim::{Optimizer, OptimizerConfig};
use crate::qsim::{
    adjoint_grad, amplitude_encode, parameter_shift_grad_by, qubits_for, run_ansatz, AnsatzCircuit, Entangler,
    GradientMethod, StateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub layers: usize,
    pub entangler: Entangler,
    pub optimizer: OptimizerConfig,
    pub gradient: GradientMethod,
    /// Half-width of the uniform initialization interval for `theta`.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            layers: 3,
            entangler: Entangler::Ring,
            optimizer: OptimizerConfig::default(),
            gradient: GradientMethod::ParameterShift,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.layers == 0 {
            return Err(Error::Parameter("classifier needs at least one layer".into()));
        }
        if !(self.init_scale >= 0.0) {
            return Err(Error::Parameter("init_scale must be non-negative".into()));
        }
        Ok(())
    }
}

/// One trained stage of the cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryVqcModel {
    pub class_id: usize,
    pub circuit: AnsatzCircuit,
    pub bias: f64,
    /// Positive rate of the stage's training pool.
    pub threshold: f64,
    /// Set for stages whose pool held a single class: `Some(true)` always
    /// fires, `Some(false)` never does.
    pub constant: Option<bool>,
    /// Full-batch loss before the first update and after every epoch.
    pub loss_trace: Vec<f64>,
}

impl BinaryVqcModel {
    pub fn theta(&self) -> &[f64] {
        self.circuit.theta()
    }

    pub fn qubits(&self) -> usize {
        self.circuit.qubits()
    }

    pub fn fires(&self, x: &[f64]) -> Result<bool> {
        match self.constant {
            Some(c) => Ok(c),
            None => Ok(score(self, x)? > self.threshold),
        }
    }
}

/// `P(qubit 0 = 1) + b` after running the stage circuit on the encoding of `x`.
pub fn score(model: &BinaryVqcModel, x: &[f64]) -> Result<f64> {
    let input = encode_for(&model.circuit, x)?;
    Ok(p_one(&model.circuit, &input)? + model.bias)
}

fn encode_for(circ: &AnsatzCircuit, x: &[f64]) -> Result<StateVector> {
    let s = amplitude_encode(x)?;
    if s.qubits() != circ.qubits() {
        return Err(Error::Dimension(format!(
            "sample with {} features needs {} qubits, circuit has {}",
            x.len(),
            s.qubits(),
            circ.qubits()
        )));
    }
    Ok(s)
}

fn p_one(circ: &AnsatzCircuit, input: &StateVector) -> Result<f64> {
    run_ansatz(circ, input)?.prob_one(0)
}

/// Loss `1/2 sum (P(1) + b - y)^2` and its gradient `(d theta, d b)`.
pub(crate) fn loss_and_grad(
    circ: &AnsatzCircuit,
    bias: f64,
    inputs: &[StateVector],
    targets: &[f64],
    method: GradientMethod,
) -> Result<(f64, Vec<f64>, f64)> {
    let mut loss = 0.0;
    let mut g_theta = vec![0.0; circ.param_count()];
    let mut g_b = 0.0;
    let half = circ.qubits() - 1;
    for (input, &y) in inputs.iter().zip(targets) {
        let (p, dp) = match method {
            GradientMethod::ParameterShift => (
                p_one(circ, input)?,
                parameter_shift_grad_by(circ, input, |s| s.prob_one(0))?,
            ),
            GradientMethod::Adjoint => adjoint_grad(circ, input, |psi| {
                // projector onto qubit 0 = |1>: the upper half of the index range
                let cut = 1usize << half;
                let lam: Vec<Complex64> = psi
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| if i >= cut { *a } else { Complex64::new(0.0, 0.0) })
                    .collect();
                let p = lam.iter().map(|a| a.norm_sqr()).sum();
                Ok((p, lam))
            })?,
        };
        let r = p + bias - y;
        loss += 0.5 * r * r;
        g_b += r;
        for (g, d) in g_theta.iter_mut().zip(&dp) {
            *g += r * d;
        }
    }
    Ok((loss, g_theta, g_b))
}

/// Rows of `x` as one sample per column.
pub(crate) fn column(x: &DMatrix<f64>, j: usize) -> Vec<f64> {
    x.column(j).iter().copied().collect()
}

/// Train the stage separating `class_id` (target 1) from every other label
/// present in `labels` (target 0). Samples are the columns of `x` and are
/// encoded as given.
///
/// The returned parameters are the best seen over the run, so the final loss
/// never exceeds the initial one.
pub fn train_binary(
    x: &DMatrix<f64>,
    labels: &LabelVector,
    class_id: usize,
    cfg: &TrainConfig,
) -> Result<BinaryVqcModel> {
    cfg.validate()?;
    if x.ncols() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} samples but {} labels",
            x.ncols(),
            labels.len()
        )));
    }
    let targets: Vec<f64> = labels
        .as_slice()
        .iter()
        .map(|&l| if l == class_id { 1.0 } else { 0.0 })
        .collect();
    let positives = targets.iter().filter(|&&t| t == 1.0).count();
    if positives == 0 || positives == targets.len() {
        return Err(Error::DegenerateData(format!(
            "stage for class {class_id} sees {positives} positives out of {}",
            targets.len()
        )));
    }
    let qubits = qubits_for(x.nrows());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (class_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let theta: Vec<f64> = (0..qubits * cfg.layers)
        .map(|_| {
            if cfg.init_scale > 0.0 {
                rng.random_range(-cfg.init_scale..cfg.init_scale)
            } else {
                0.0
            }
        })
        .collect();
    let mut circuit = AnsatzCircuit::new(qubits, cfg.layers, cfg.entangler, theta)?;
    let inputs: Vec<StateVector> = (0..x.ncols())
        .map(|j| encode_for(&circuit, &column(x, j)))
        .collect::<Result<_>>()?;

    let mut params: Vec<f64> = circuit.theta().to_vec();
    params.push(0.0);
    let mut opt = Optimizer::new(cfg.optimizer, params.len())?;
    let np = circuit.param_count();

    let (mut loss, mut g, mut gb) = loss_and_grad(&circuit, 0.0, &inputs, &targets, cfg.gradient)?;
    let mut trace = vec![loss];
    let mut best = (loss, params.clone());
    for _ in 0..cfg.epochs {
        g.push(gb);
        opt.step(&mut params, &g);
        circuit.set_theta(&params[..np])?;
        (loss, g, gb) = loss_and_grad(&circuit, params[np], &inputs, &targets, cfg.gradient)?;
        trace.push(loss);
        if loss < best.0 {
            best = (loss, params.clone());
        }
    }
    circuit.set_theta(&best.1[..np])?;
    Ok(BinaryVqcModel {
        class_id,
        circuit,
        bias: best.1[np],
        threshold: positives as f64 / targets.len() as f64,
        constant: None,
        loss_trace: trace,
    })
}
