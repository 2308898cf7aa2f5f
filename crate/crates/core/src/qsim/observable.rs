use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::state::{check_qubits, StateVector};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

/// Hermitian operator on a `q`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Dense(DMatrix<Complex64>),
    /// Real symmetric matrices are common enough (every Hamiltonian built from
    /// kernel matrices) to skip complex arithmetic.
    RealSymmetric(DMatrix<f64>),
    Diagonal(Vec<f64>),
}

fn dim_qubits(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "observable dimension {dim} is not a power of two >= 2"
        )));
    }
    let q = dim.trailing_zeros() as usize;
    check_qubits(q)?;
    Ok(q)
}

impl Observable {
    pub fn dense(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("observable must be square".into()));
        }
        dim_qubits(m.nrows())?;
        let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL * m.iter().map(|z| z.norm()).fold(1.0, f64::max) {
            return Err(Error::Input(format!(
                "observable is not Hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(Self::Dense(m))
    }

    pub fn real_symmetric(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("observable must be square".into()));
        }
        dim_qubits(m.nrows())?;
        let dev = crate::linalg::max_asymmetry(&m);
        if dev > HERMITIAN_TOL * m.amax().max(1.0) {
            return Err(Error::Input(format!(
                "observable is not symmetric (deviation {dev:.3e})"
            )));
        }
        Ok(Self::RealSymmetric(m))
    }

    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        dim_qubits(d.len())?;
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("diagonal observable has non-finite entries".into()));
        }
        Ok(Self::Diagonal(d))
    }

    /// Pauli Z on `qubit` of a `q`-qubit register.
    pub fn pauli_z(q: usize, qubit: usize) -> Result<Self> {
        check_qubits(q)?;
        if qubit >= q {
            return Err(Error::QubitIndex {
                index: qubit,
                qubits: q,
            });
        }
        let m = super::gate::mask(q, qubit);
        Ok(Self::Diagonal(
            (0..1usize << q).map(|i| if i & m == 0 { 1.0 } else { -1.0 }).collect(),
        ))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::RealSymmetric(m) => m.nrows(),
            Self::Diagonal(d) => d.len(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::RealSymmetric(m) => m.map(|v| Complex64::new(v, 0.0)),
            Self::Diagonal(d) => {
                let n = d.len();
                DMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0))
            }
        }
    }

    /// `H v` for an amplitude slice of matching length.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        match self {
            Self::Dense(m) => (m * DVector::from_column_slice(v)).as_slice().to_vec(),
            Self::RealSymmetric(m) => {
                let re = DVector::from_iterator(v.len(), v.iter().map(|z| z.re));
                let out_re = m * re;
                if v.iter().all(|z| z.im == 0.0) {
                    return out_re.iter().map(|&r| Complex64::new(r, 0.0)).collect();
                }
                let im = DVector::from_iterator(v.len(), v.iter().map(|z| z.im));
                let out_im = m * im;
                out_re
                    .iter()
                    .zip(out_im.iter())
                    .map(|(&r, &i)| Complex64::new(r, i))
                    .collect()
            }
            Self::Diagonal(d) => v.iter().zip(d).map(|(z, &w)| z * w).collect(),
        }
    }
}

/// `<psi|H|psi>`, dropping the (round-off) imaginary part.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    if obs.dim() != state.dim() {
        return Err(Error::Dimension(format!(
            "observable is {0}x{0} but the state has {1} amplitudes",
            obs.dim(),
            state.dim()
        )));
    }
    let hv = obs.apply(state.amplitudes());
    let val: Complex64 = state
        .amplitudes()
        .iter()
        .zip(hv.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(val.re)
}
