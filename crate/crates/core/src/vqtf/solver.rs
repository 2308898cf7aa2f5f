use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianPair;
use crate::error::{Error, Result};
use crate::optim::{Optimizer, OptimizerConfig};
use crate::qsim::{adjoint_grad, run_ansatz, AnsatzCircuit, Entangler, GradientMethod, StateVector};

type C = Complex64;

const DENOMINATOR_GUARD: f64 = 1e-12;
const ACCEPT_SLACK: f64 = 1e-9;

/// Penalty that keeps level `k` away from the states already found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeflationMode {
    /// `alpha_i |<psi_i|H_B|psi>|^2 / (<psi_i|H_B|psi_i> <psi|H_B|psi>)`: the
    /// squared cosine in the `H_B` inner product, which shifts the found
    /// eigenvalue up by exactly `alpha_i` whatever the scale of `H_B`.
    #[default]
    Normalized,
    /// `alpha_i |<psi_i|H_B|psi>|^2` without normalization.
    Overlap,
    /// `alpha_i <psi|H_B|psi>^2`, which ignores the earlier states entirely.
    Literal,
}

/// States found so far, with their penalty weights and Rayleigh values.
#[derive(Debug, Clone)]
pub struct DeflationSet {
    pub mode: DeflationMode,
    pub states: Vec<StateVector>,
    pub alphas: Vec<f64>,
    pub eigvals: Vec<f64>,
    b_states: Vec<Vec<C>>,
    b_norms: Vec<f64>,
}

impl DeflationSet {
    pub fn new(mode: DeflationMode) -> Self {
        Self {
            mode,
            states: Vec::new(),
            alphas: Vec::new(),
            eigvals: Vec::new(),
            b_states: Vec::new(),
            b_norms: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn push(&mut self, pair: &HamiltonianPair, state: StateVector, alpha: f64, eigval: f64) -> Result<()> {
        if !(alpha > 0.0) {
            return Err(Error::Parameter(format!(
                "deflation weight must be positive, got {alpha}"
            )));
        }
        let bv = matvec(&pair.h_b, state.amplitudes());
        let bn = dot(state.amplitudes(), &bv).re;
        self.states.push(state);
        self.alphas.push(alpha);
        self.eigvals.push(eigval);
        self.b_states.push(bv);
        self.b_norms.push(bn);
        Ok(())
    }

    /// `|<psi_i|H_B|psi>| / sqrt(<psi_i|H_B|psi_i> <psi|H_B|psi>)` for every stored state.
    pub fn b_cosines(&self, pair: &HamiltonianPair, psi: &StateVector) -> Vec<f64> {
        let bpsi = matvec(&pair.h_b, psi.amplitudes());
        let b = dot(psi.amplitudes(), &bpsi).re;
        self.b_states
            .iter()
            .zip(&self.b_norms)
            .map(|(bi, &bn)| dot(bi, psi.amplitudes()).norm() / (bn * b).sqrt())
            .collect()
    }
}

fn matvec(m: &DMatrix<f64>, v: &[C]) -> Vec<C> {
    let n = v.len();
    let re = nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.re));
    let out_re = m * re;
    if v.iter().all(|z| z.im == 0.0) {
        return out_re.iter().map(|&r| C::new(r, 0.0)).collect();
    }
    let im = nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.im));
    let out_im = m * im;
    out_re.iter().zip(out_im.iter()).map(|(&r, &i)| C::new(r, i)).collect()
}

/// `<u|v>`.
fn dot(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Scalar pieces the loss is assembled from.
struct Parts {
    a: f64,
    b: f64,
    /// `<psi_i|H_B|psi>` per stored state.
    overlaps: Vec<C>,
}

fn parts(pair: &HamiltonianPair, defl: &DeflationSet, psi: &[C]) -> (Parts, Vec<C>, Vec<C>) {
    let apsi = matvec(&pair.h_a, psi);
    let bpsi = matvec(&pair.h_b, psi);
    let a = dot(psi, &apsi).re;
    let b = dot(psi, &bpsi).re;
    let overlaps = defl.b_states.iter().map(|bi| dot(bi, psi)).collect();
    (Parts { a, b, overlaps }, apsi, bpsi)
}

fn assemble(p: &Parts, defl: &DeflationSet) -> Result<(f64, f64)> {
    if !(p.b > DENOMINATOR_GUARD) {
        return Err(Error::DenominatorGuard { value: p.b });
    }
    let ray = p.a / p.b;
    let penalty: f64 = match defl.mode {
        DeflationMode::Normalized => p
            .overlaps
            .iter()
            .zip(defl.alphas.iter().zip(&defl.b_norms))
            .map(|(o, (al, bn))| al * o.norm_sqr() / (bn * p.b))
            .sum(),
        DeflationMode::Overlap => p
            .overlaps
            .iter()
            .zip(&defl.alphas)
            .map(|(o, al)| al * o.norm_sqr())
            .sum(),
        DeflationMode::Literal => defl.alphas.iter().map(|al| al * p.b * p.b).sum(),
    };
    Ok((ray + penalty, ray))
}

/// Level loss at the parameters held by `circ`, with `|psi> = U(theta)|0...0>`.
pub fn eigenstate_loss(circ: &AnsatzCircuit, pair: &HamiltonianPair, defl: &DeflationSet) -> Result<f64> {
    let psi = prepare(circ, pair)?;
    let (p, _, _) = parts(pair, defl, psi.amplitudes());
    Ok(assemble(&p, defl)?.0)
}

fn prepare(circ: &AnsatzCircuit, pair: &HamiltonianPair) -> Result<StateVector> {
    if circ.qubits() != pair.q {
        return Err(Error::Dimension(format!(
            "circuit has {} qubits, Hamiltonians need {}",
            circ.qubits(),
            pair.q
        )));
    }
    run_ansatz(circ, &StateVector::zero(pair.q)?)
}

/// `(loss, rayleigh, gradient)`.
pub(crate) fn loss_and_grad(
    circ: &AnsatzCircuit,
    pair: &HamiltonianPair,
    defl: &DeflationSet,
    method: GradientMethod,
) -> Result<(f64, f64, Vec<f64>)> {
    match method {
        GradientMethod::Adjoint => {
            let zero = StateVector::zero(pair.q)?;
            let mut ray = 0.0;
            let (loss, grad) = adjoint_grad(circ, &zero, |psi| {
                let (p, apsi, bpsi) = parts(pair, defl, psi.amplitudes());
                let (loss, r) = assemble(&p, defl)?;
                ray = r;
                Ok((loss, costate(&p, defl, &apsi, &bpsi)))
            })?;
            Ok((loss, ray, grad))
        }
        GradientMethod::ParameterShift => shift_loss_and_grad(circ, pair, defl),
    }
}

/// `lambda` with `d loss = 2 Re <lambda|d psi>`.
fn costate(p: &Parts, defl: &DeflationSet, apsi: &[C], bpsi: &[C]) -> Vec<C> {
    let (a, b) = (p.a, p.b);
    // d(a/b) = da/b - a db / b^2
    let mut coef_b = -a / (b * b);
    let coef_a = 1.0 / b;
    let mut extra: Vec<(C, usize)> = Vec::new();
    match defl.mode {
        DeflationMode::Normalized => {
            for (i, o) in p.overlaps.iter().enumerate() {
                let w = defl.alphas[i] / defl.b_norms[i];
                // d(|o|^2 / b) = d|o|^2 / b - |o|^2 db / b^2
                extra.push((*o * (w / b), i));
                coef_b -= w * o.norm_sqr() / (b * b);
            }
        }
        DeflationMode::Overlap => {
            for (i, o) in p.overlaps.iter().enumerate() {
                extra.push((*o * defl.alphas[i], i));
            }
        }
        DeflationMode::Literal => {
            coef_b += defl.alphas.iter().sum::<f64>() * 2.0 * b;
        }
    }
    let mut lam: Vec<C> = apsi.iter().zip(bpsi).map(|(x, y)| x * coef_a + y * coef_b).collect();
    // d|o_i|^2 = 2 Re <o_i H_B psi_i | d psi>
    for (c, i) in extra {
        for (l, bi) in lam.iter_mut().zip(&defl.b_states[i]) {
            *l += bi * c;
        }
    }
    lam
}

/// Chain rule over shift-rule gradients of `a`, `b` and each `|o_i|^2`,
/// all of which are expectation values.
fn shift_loss_and_grad(
    circ: &AnsatzCircuit,
    pair: &HamiltonianPair,
    defl: &DeflationSet,
) -> Result<(f64, f64, Vec<f64>)> {
    let measure = |c: &AnsatzCircuit| -> Result<Parts> {
        let psi = prepare(c, pair)?;
        Ok(parts(pair, defl, psi.amplitudes()).0)
    };
    let base = measure(circ)?;
    let (loss, ray) = assemble(&base, defl)?;
    let m = base.overlaps.len();
    let (a, b) = (base.a, base.b);
    let mut work = circ.clone();
    let mut theta = circ.theta().to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let t0 = theta[j];
        theta[j] = t0 + FRAC_PI_2;
        work.set_theta(&theta)?;
        let plus = measure(&work)?;
        theta[j] = t0 - FRAC_PI_2;
        work.set_theta(&theta)?;
        let minus = measure(&work)?;
        theta[j] = t0;
        let da = 0.5 * (plus.a - minus.a);
        let db = 0.5 * (plus.b - minus.b);
        let mut g = da / b - a * db / (b * b);
        for i in 0..m {
            let dp = 0.5 * (plus.overlaps[i].norm_sqr() - minus.overlaps[i].norm_sqr());
            let p = base.overlaps[i].norm_sqr();
            g += match defl.mode {
                DeflationMode::Normalized => defl.alphas[i] / defl.b_norms[i] * (dp / b - p * db / (b * b)),
                DeflationMode::Overlap => defl.alphas[i] * dp,
                DeflationMode::Literal => 0.0,
            };
        }
        if defl.mode == DeflationMode::Literal {
            g += defl.alphas.iter().sum::<f64>() * 2.0 * b * db;
        }
        grad.push(g);
    }
    Ok((loss, ray, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenSolverConfig {
    pub d: usize,
    pub layers: usize,
    pub entangler: Entangler,
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub gradient: GradientMethod,
    pub deflation: DeflationMode,
    /// Fixed deflation weight; `None` uses `10 max(|lambda_i|, 1)`.
    pub alpha_deflate: Option<f64>,
    /// Level-end squared-cosine check that triggers doubling the weights.
    pub orthogonality_tol: f64,
    pub max_alpha_doublings: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for EigenSolverConfig {
    fn default() -> Self {
        Self {
            d: 2,
            layers: 3,
            entangler: Entangler::Ring,
            epochs: 500,
            optimizer: OptimizerConfig {
                learning_rate: 0.05,
                ..OptimizerConfig::default()
            },
            gradient: GradientMethod::Adjoint,
            deflation: DeflationMode::Normalized,
            alpha_deflate: None,
            orthogonality_tol: 0.05,
            max_alpha_doublings: 3,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

impl EigenSolverConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        self.optimizer.validate()?;
        if self.d == 0 || self.d > n {
            return Err(Error::Parameter(format!("need 1 <= d <= {n}, got {}", self.d)));
        }
        if self.layers == 0 {
            return Err(Error::Parameter("eigensolver ansatz needs at least one layer".into()));
        }
        if let Some(a) = self.alpha_deflate {
            if !(a > 0.0) {
                return Err(Error::Parameter(format!("alpha_deflate must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub final_loss: f64,
    pub rayleigh: f64,
    /// Loss at the start and after every epoch; non-increasing.
    pub loss_trace: Vec<f64>,
    pub epochs_run: usize,
    pub rejected_steps: usize,
    pub alpha: f64,
    /// Largest `H_B` cosine with an earlier level.
    pub max_b_cosine: f64,
    pub converged: bool,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// Rayleigh quotients of the found states, in level order.
    pub eigvals: Vec<f64>,
    /// n x d, column `k` from the first `n` amplitudes of level `k`,
    /// scaled to unit `H_B` norm.
    pub w: DMatrix<f64>,
    pub deflation: DeflationSet,
    pub levels: Vec<LevelReport>,
}

impl EigenSolution {
    pub fn converged(&self) -> bool {
        self.levels.iter().all(|l| l.converged)
    }
}

/// Minimize `L_1, ..., L_d` in turn, deflating each found state.
pub fn solve_eigenstates(pair: &HamiltonianPair, cfg: &EigenSolverConfig) -> Result<EigenSolution> {
    solve_eigenstates_from(pair, cfg, &[])
}

/// [`solve_eigenstates`] with optional starting parameters per level.
pub fn solve_eigenstates_from(
    pair: &HamiltonianPair,
    cfg: &EigenSolverConfig,
    warm: &[Vec<f64>],
) -> Result<EigenSolution> {
    cfg.validate(pair.n)?;
    let q = pair.q;
    let n_params = q * cfg.layers;
    let mut defl = DeflationSet::new(cfg.deflation);
    let mut levels = Vec::with_capacity(cfg.d);
    let mut w = DMatrix::zeros(pair.n, cfg.d);
    for level in 0..cfg.d {
        let init = match warm.get(level) {
            Some(t) if t.len() == n_params => t.clone(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED_0000 + level as u64));
                (0..n_params)
                    .map(|_| {
                        if cfg.init_scale > 0.0 {
                            rng.random_range(-cfg.init_scale..cfg.init_scale)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
        };
        let mut circ = AnsatzCircuit::new(q, cfg.layers, cfg.entangler, init)?;
        let scale = cfg
            .alpha_deflate
            .unwrap_or_else(|| 10.0 * defl.eigvals.iter().fold(1.0f64, |m, v| m.max(v.abs())));
        let mut report = None;
        for attempt in 0..=cfg.max_alpha_doublings {
            let alpha = scale * f64::powi(2.0, attempt as i32);
            let mut trial = defl.clone();
            trial.alphas.iter_mut().for_each(|a| *a = alpha);
            let rep = optimize_level(&mut circ, pair, &trial, cfg, level, alpha)?;
            let ok = rep.max_b_cosine <= cfg.orthogonality_tol || defl.is_empty();
            report = Some((rep, trial));
            if ok || cfg.deflation == DeflationMode::Literal {
                break;
            }
            log::debug!("level {level}: B-cosine above tolerance, doubling the deflation weight");
        }
        let (rep, trial) = report.expect("at least one attempt");
        defl.alphas = trial.alphas;
        let psi = prepare(&circ, pair)?;
        let im = psi.amplitudes().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if im > 1e-3 {
            log::warn!("level {level}: amplitudes carry imaginary parts up to {im:.2e}");
        }
        let mut col: Vec<f64> = psi.amplitudes()[..pair.n].iter().map(|z| z.re).collect();
        let (_, hb) = pair.active();
        let v = nalgebra::DVector::from_column_slice(&col);
        let bn = v.dot(&(&hb * &v));
        if bn > DENOMINATOR_GUARD {
            col.iter_mut().for_each(|x| *x /= bn.sqrt());
        }
        w.column_mut(level).copy_from_slice(&col);
        if !rep.converged {
            log::warn!("level {level}: epoch budget exhausted before convergence");
        }
        defl.push(pair, psi, rep.alpha, rep.rayleigh)?;
        levels.push(rep);
    }
    Ok(EigenSolution {
        eigvals: defl.eigvals.clone(),
        w,
        deflation: defl,
        levels,
    })
}

fn optimize_level(
    circ: &mut AnsatzCircuit,
    pair: &HamiltonianPair,
    defl: &DeflationSet,
    cfg: &EigenSolverConfig,
    level: usize,
    alpha: f64,
) -> Result<LevelReport> {
    let mut theta = circ.theta().to_vec();
    let mut opt = Optimizer::new(cfg.optimizer, theta.len())?;
    let base_lr = cfg.optimizer.learning_rate;
    let (mut loss, mut ray, mut grad) = loss_and_grad(circ, pair, defl, cfg.gradient)?;
    let mut trace = vec![loss];
    let mut rejected = 0;
    let mut epochs_run = 0;
    let mut trial_circ = circ.clone();
    for _ in 0..cfg.epochs {
        epochs_run += 1;
        let snapshot = opt.clone();
        let mut trial = theta.clone();
        opt.step(&mut trial, &grad);
        trial_circ.set_theta(&trial)?;
        match loss_and_grad(&trial_circ, pair, defl, cfg.gradient) {
            Ok((l, r, g)) if l <= loss + ACCEPT_SLACK => {
                theta = trial;
                loss = l.min(loss);
                ray = r;
                grad = g;
                opt.set_learning_rate((opt.learning_rate() * 1.1).min(base_lr));
            }
            Ok(_) | Err(Error::DenominatorGuard { .. }) => {
                // stale momentum can point uphill; restart the moments
                rejected += 1;
                let lr = snapshot.learning_rate() * 0.5;
                opt = snapshot;
                opt.reset();
                opt.set_learning_rate(lr);
            }
            Err(e) => return Err(e),
        }
        trace.push(loss);
        if opt.learning_rate() < base_lr * 1e-6 {
            break;
        }
    }
    circ.set_theta(&theta)?;
    let window = (trace.len() / 10).max(10).min(trace.len() - 1);
    let recent = trace[trace.len() - 1 - window] - loss;
    let converged = epochs_run < cfg.epochs || recent <= 1e-4 * loss.abs().max(1e-12);
    let psi = prepare(circ, pair)?;
    let max_b_cosine = defl.b_cosines(pair, &psi).into_iter().fold(0.0, f64::max);
    Ok(LevelReport {
        level,
        final_loss: loss,
        rayleigh: ray,
        loss_trace: trace,
        epochs_run,
        rejected_steps: rejected,
        alpha,
        max_b_cosine,
        converged,
        theta,
    })
}
