use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel_dda::KernelBundle;
use crate::qsim::{qubits_for, MAX_QUBITS};

/// `(H_A, H_B)` embedded in a `2^q` register. The active `n x n` block holds
/// the alignment pair; padded directions get `H_A = pad_penalty` and
/// `H_B = 1` on the diagonal so their Rayleigh quotient sits far above the
/// bottom of the spectrum.
#[derive(Debug, Clone)]
pub struct HamiltonianPair {
    pub h_a: DMatrix<f64>,
    pub h_b: DMatrix<f64>,
    pub n: usize,
    pub q: usize,
    pub pad_penalty: f64,
}

impl HamiltonianPair {
    pub fn dim(&self) -> usize {
        1 << self.q
    }

    /// Active top-left blocks.
    pub fn active(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            self.h_a.view((0, 0), (self.n, self.n)).into_owned(),
            self.h_b.view((0, 0), (self.n, self.n)).into_owned(),
        )
    }
}

/// `H_A = K L_Q K + mu I`, `H_B = K M K`, padded to `q` qubits.
pub fn build_hamiltonians(bundle: &KernelBundle, q: usize) -> Result<HamiltonianPair> {
    embed_pair(&bundle.objective_matrix(), &bundle.constraint_matrix(), q)
}

/// Pad an arbitrary symmetric pair; `q = None` picks the smallest register.
pub fn embed_pair(a: &DMatrix<f64>, b: &DMatrix<f64>, q: impl Into<Option<usize>>) -> Result<HamiltonianPair> {
    let n = crate::linalg::require_square(a, "H_A")?;
    if b.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "H_A is {n}x{n} but H_B is {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let q = q.into().unwrap_or_else(|| qubits_for(n));
    if q > MAX_QUBITS {
        return Err(Error::QubitCap {
            requested: q,
            cap: MAX_QUBITS,
        });
    }
    let dim = 1usize << q;
    if n > dim {
        return Err(Error::Dimension(format!(
            "{n} active dimensions do not fit in {q} qubits"
        )));
    }
    let pad_penalty = 10.0
        * (0..n)
            .map(|i| a[(i, i)].abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
    let mut h_a = DMatrix::zeros(dim, dim);
    let mut h_b = DMatrix::zeros(dim, dim);
    h_a.view_mut((0, 0), (n, n)).copy_from(&crate::linalg::symmetrize(a));
    h_b.view_mut((0, 0), (n, n)).copy_from(&crate::linalg::symmetrize(b));
    for i in n..dim {
        h_a[(i, i)] = pad_penalty;
        h_b[(i, i)] = 1.0;
    }
    Ok(HamiltonianPair {
        h_a,
        h_b,
        n,
        q,
        pad_penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_dda::{build_mmd_matrices, solve_generalized_eigen, LabelVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spd(n: usize, rng: &mut ChaCha8Rng, shift: f64) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(n, n) * shift
    }

    #[test]
    fn full_register_is_exact_embed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0));
        let k = x.transpose() * &x + DMatrix::identity(4, 4);
        let labels = LabelVector::new(vec![0, 1, 0, 1], 2).unwrap();
        let mats = build_mmd_matrices(2, 2, Some(&labels), 0.5, 2).unwrap();
        let bundle = KernelBundle::new(k, mats, 0.5, 1.0).unwrap();
        let pair = build_hamiltonians(&bundle, 2).unwrap();
        let want = bundle.objective_matrix();
        assert!((&pair.h_a - crate::linalg::symmetrize(&want)).amax() < 1e-15);
        assert!((&pair.h_b - crate::linalg::symmetrize(&bundle.constraint_matrix())).amax() < 1e-15);
    }

    #[test]
    fn padding_rule() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -3.0, 2.0]));
        let pair = embed_pair(&a, &DMatrix::identity(3, 3), 2).unwrap();
        assert_eq!(pair.pad_penalty, 30.0);
        assert_eq!(pair.h_b[(3, 3)], 1.0);
        assert_eq!(pair.h_a[(3, 3)], 30.0);
        for j in 0..3 {
            assert_eq!(pair.h_b[(3, j)], 0.0);
            assert_eq!(pair.h_b[(j, 3)], 0.0);
            assert_eq!(pair.h_a[(3, j)], 0.0);
        }
    }

    #[test]
    fn padding_keeps_bottom_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [3usize, 5, 6, 7] {
            let a = spd(n, &mut rng, 0.5);
            let b = spd(n, &mut rng, 1.0);
            let d = 2;
            let raw = solve_generalized_eigen(&a, &b, d).unwrap();
            let pair = embed_pair(&a, &b, None).unwrap();
            let padded = solve_generalized_eigen(&pair.h_a, &pair.h_b, d).unwrap();
            for (x, y) in raw.values.iter().zip(&padded.values) {
                assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn oversized_errors() {
        let a = DMatrix::identity(5, 5);
        assert!(embed_pair(&a, &a, 2).is_err());
        assert!(matches!(embed_pair(&a, &a, 13), Err(Error::QubitCap { .. })));
    }
}
