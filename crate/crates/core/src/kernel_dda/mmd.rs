use nalgebra::{DMatrix, DVector};

use super::LabelVector;
use crate::error::{Error, Result};

/// MMD weight matrices for one labelling of the pooled samples.
#[derive(Debug, Clone)]
pub struct MmdMatrices {
    pub l0: DMatrix<f64>,
    /// One conditional matrix per class; empty when built without labels.
    pub lc: Vec<DMatrix<f64>>,
    pub m: DMatrix<f64>,
    pub l_q: DMatrix<f64>,
}

/// Kernel matrix together with the MMD weights and ridge it is solved with.
#[derive(Debug, Clone)]
pub struct KernelBundle {
    pub k: DMatrix<f64>,
    pub l0: DMatrix<f64>,
    pub lc: Vec<DMatrix<f64>>,
    pub m: DMatrix<f64>,
    pub l_q: DMatrix<f64>,
    pub kappa: f64,
    pub mu: f64,
}

impl KernelBundle {
    pub fn new(k: DMatrix<f64>, mats: MmdMatrices, kappa: f64, mu: f64) -> Result<Self> {
        let n = crate::linalg::require_square(&k, "kernel")?;
        if mats.l0.nrows() != n {
            return Err(Error::Dimension(format!(
                "kernel is {n}x{n} but MMD matrices are {}x{}",
                mats.l0.nrows(),
                mats.l0.ncols()
            )));
        }
        if mu < 0.0 {
            return Err(Error::Parameter(format!("ridge mu must be >= 0, got {mu}")));
        }
        Ok(Self {
            k,
            l0: mats.l0,
            lc: mats.lc,
            m: mats.m,
            l_q: mats.l_q,
            kappa,
            mu,
        })
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    /// `K L_Q K + mu I`.
    pub fn objective_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        &self.k * &self.l_q * &self.k + DMatrix::identity(n, n) * self.mu
    }

    /// `K M K`.
    pub fn constraint_matrix(&self) -> DMatrix<f64> {
        &self.k * &self.m * &self.k
    }
}

fn indicator(n: usize, entries: impl Iterator<Item = (usize, f64)>) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    for (i, val) in entries {
        v[i] = val;
    }
    v
}

pub(crate) fn marginal_vector(n_s: usize, n_t: usize) -> DVector<f64> {
    let n = n_s + n_t;
    indicator(
        n,
        (0..n).map(|i| {
            if i < n_s {
                (i, 1.0 / n_s as f64)
            } else {
                (i, -1.0 / n_t as f64)
            }
        }),
    )
}

/// Class-conditional vector `l_c`; a class without predicted target members
/// keeps only its source normalization.
pub(crate) fn conditional_vector(labels: &[usize], n_s: usize, class: usize) -> DVector<f64> {
    let n = labels.len();
    let n_sc = labels[..n_s].iter().filter(|&&l| l == class).count();
    let n_tc = labels[n_s..].iter().filter(|&&l| l == class).count();
    indicator(
        n,
        labels.iter().enumerate().filter_map(|(i, &l)| {
            if l != class {
                None
            } else if i < n_s {
                Some((i, 1.0 / n_sc as f64))
            } else {
                Some((i, -1.0 / n_tc as f64))
            }
        }),
    )
}

pub(crate) fn centering(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
}

/// Build `L0`, the per-class `Lc`, the centering `M` and
/// `L_Q = (1 - kappa) L0 + kappa sum_c Lc`.
///
/// `labels` covers all `n_s + n_t` samples (source truth then target pseudo
/// labels) and is required whenever `kappa > 0`.
pub fn build_mmd_matrices(
    n_s: usize,
    n_t: usize,
    labels: Option<&LabelVector>,
    kappa: f64,
    n_classes: usize,
) -> Result<MmdMatrices> {
    build_weighted(n_s, n_t, labels, 1.0 - kappa, kappa, n_classes, kappa)
}

pub(crate) fn build_weighted(
    n_s: usize,
    n_t: usize,
    labels: Option<&LabelVector>,
    marginal_weight: f64,
    conditional_weight: f64,
    n_classes: usize,
    kappa: f64,
) -> Result<MmdMatrices> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Parameter(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    if n_s == 0 || n_t == 0 {
        return Err(Error::Input("MMD needs both domains non-empty".into()));
    }
    let n = n_s + n_t;
    let l0 = crate::linalg::outer(&marginal_vector(n_s, n_t));
    let mut l_q = &l0 * marginal_weight;
    let mut lc = Vec::new();
    match labels {
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::Dimension(format!("expected {n} labels, got {}", labels.len())));
            }
            for c in 0..n_classes {
                let m = crate::linalg::outer(&conditional_vector(labels.as_slice(), n_s, c));
                if conditional_weight != 0.0 {
                    l_q += &m * conditional_weight;
                }
                lc.push(m);
            }
        }
        None if conditional_weight > 0.0 => {
            return Err(Error::Input("conditional MMD terms requested without labels".into()))
        }
        None => {}
    }
    Ok(MmdMatrices {
        l0,
        lc,
        m: centering(n),
        l_q,
    })
}

/// `tr(K L)`, computed without forming the product.
pub fn mmd_trace(k: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<f64> {
    if k.shape() != l.shape() || k.nrows() != k.ncols() {
        return Err(Error::Dimension(format!(
            "trace(K L) needs matching square matrices, got {:?} and {:?}",
            k.shape(),
            l.shape()
        )));
    }
    let n = k.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += k[(i, j)] * l[(j, i)];
        }
    }
    Ok(acc)
}

/// Squared distance between the kernel mean embeddings of the first `n_s`
/// samples and the rest, as an explicit double sum over `K`.
pub fn direct_mmd(k: &DMatrix<f64>, n_s: usize) -> f64 {
    let n = k.nrows();
    let n_t = n - n_s;
    let block_mean = |r0: usize, r1: usize, c0: usize, c1: usize| {
        let mut s = 0.0;
        for i in r0..r1 {
            for j in c0..c1 {
                s += k[(i, j)];
            }
        }
        s / ((r1 - r0) * (c1 - c0)) as f64
    };
    let ss = block_mean(0, n_s, 0, n_s);
    let tt = block_mean(n_s, n, n_s, n);
    let st = block_mean(0, n_s, n_s, n);
    debug_assert!(n_t > 0);
    ss + tt - 2.0 * st
}
