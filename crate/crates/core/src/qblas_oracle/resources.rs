use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::sym_eigen;

/// One stage of the asymptotic cost model, evaluated at the given size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCost {
    pub stage: String,
    pub formula: String,
    pub estimate: f64,
}

/// Condition numbers and asymptotic query-cost scores. The estimates are
/// dimensionless evaluations of big-O expressions with unit constants and
/// `log` in base 2; they are not wall-clock predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub n: usize,
    pub n_source: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub kappa_k: f64,
    pub kappa_a: f64,
    pub stages: Vec<StageCost>,
    pub asymptotic: bool,
}

impl ComplexityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `|lambda|_max / |lambda|_min`; infinite for a singular matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = sym_eigen(m);
    let (lo, hi) = eig.values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn resource_report(
    k_mat: &DMatrix<f64>,
    a_mat: &DMatrix<f64>,
    epsilon: f64,
    n_source: usize,
    d: usize,
    k: usize,
) -> ComplexityReport {
    let n = k_mat.nrows();
    let kappa_k = condition_number(k_mat);
    let kappa_a = condition_number(a_mat);
    let log_n = (n as f64).log2();
    let e3 = epsilon.powi(3);
    let stage = |stage: &str, formula: &str, estimate: f64| StageCost {
        stage: stage.into(),
        formula: formula.into(),
        estimate,
    };
    ComplexityReport {
        n,
        n_source,
        d,
        k,
        epsilon,
        kappa_k,
        kappa_a,
        stages: vec![
            stage("kernel_state", "kappa_K log n / eps^3", kappa_k * log_n / e3),
            stage("rho_b", "kappa_K^4 log n / eps^3", kappa_k.powi(4) * log_n / e3),
            stage("rho_a", "kappa_K^4 log n / eps^3", kappa_k.powi(4) * log_n / e3),
            stage("rho_g", "kappa_A^4 log n / eps^3", kappa_a.powi(4) * log_n / e3),
            stage("qpca", "sqrt(d)", (d as f64).sqrt()),
            stage("qknn", "sqrt(k n_s)", ((k * n_source) as f64).sqrt()),
        ],
        asymptotic: true,
    }
}
