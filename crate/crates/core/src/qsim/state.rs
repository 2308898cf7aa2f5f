use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: usize = 12;

/// Pure state over `q` qubits. Qubit 0 is the most significant bit of the
/// amplitude index, so `|q0 q1 ... >` reads as the binary index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    qubits: usize,
}

pub(crate) fn check_qubits(q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::Input("a register needs at least one qubit".into()));
    }
    if q > MAX_QUBITS {
        return Err(Error::QubitCap {
            requested: q,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Smallest `q >= 1` with `2^q >= len`.
pub fn qubits_for(len: usize) -> usize {
    let mut q = 1;
    while (1usize << q) < len {
        q += 1;
    }
    q
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, qubits })
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_qubits(qubits)?;
        if index >= 1 << qubits {
            return Err(Error::Input(format!(
                "basis index {index} out of range for {qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, qubits })
    }

    /// Wrap amplitudes, normalizing them. The length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Input(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let qubits = len.trailing_zeros() as usize;
        check_qubits(qubits)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Encoding(format!("state norm {norm} is not positive")));
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
            qubits,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Probability of reading `1` on `qubit`.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                qubits: self.qubits,
            });
        }
        let mask = 1usize << (self.qubits - 1 - qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }
}

/// Zero-pad `x` to the next power of two (at least two entries) and divide by
/// its Euclidean norm.
pub fn amplitude_encode(x: &[f64]) -> Result<StateVector> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Encoding("input has non-finite entries".into()));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Encoding("cannot encode the zero vector".into()));
    }
    let qubits = qubits_for(x.len());
    check_qubits(qubits)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
    for (a, &v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v / norm, 0.0);
    }
    Ok(StateVector { amps, qubits })
}
