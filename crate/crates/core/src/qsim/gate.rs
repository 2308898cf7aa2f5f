use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{Error, Result};

type C = Complex64;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// 2x2 complex matrix in row-major order.
pub type Mat2 = [[C; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    Ry(f64),
    Cnot,
    Cz,
    /// Controlled application of an arbitrary 2x2 unitary.
    Cu(Mat2),
}

/// One gate acting on `target`, optionally conditioned on `control`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
}

impl GateOp {
    pub fn x(target: usize) -> Self {
        Self::single(GateKind::X, target)
    }

    pub fn y(target: usize) -> Self {
        Self::single(GateKind::Y, target)
    }

    pub fn z(target: usize) -> Self {
        Self::single(GateKind::Z, target)
    }

    pub fn h(target: usize) -> Self {
        Self::single(GateKind::H, target)
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Self::single(GateKind::Ry(angle), target)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            target,
            control: Some(control),
        }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            target,
            control: Some(control),
        }
    }

    /// Controlled-`u`. Fails when `u` is not unitary within `1e-10`.
    pub fn cu(control: usize, target: usize, u: Mat2) -> Result<Self> {
        let dev = unitarity_deviation(&u);
        if dev > 1e-10 {
            return Err(Error::Parameter(format!(
                "controlled gate matrix is not unitary (deviation {dev:.3e})"
            )));
        }
        Ok(Self {
            kind: GateKind::Cu(u),
            target,
            control: Some(control),
        })
    }

    fn single(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            control: None,
        }
    }

    /// Checks qubit indices against a register of `q` qubits and that
    /// two-qubit kinds carry a distinct control.
    pub fn validate(&self, q: usize) -> Result<()> {
        if self.target >= q {
            return Err(Error::QubitIndex {
                index: self.target,
                qubits: q,
            });
        }
        let two_qubit = matches!(self.kind, GateKind::Cnot | GateKind::Cz | GateKind::Cu(_));
        match self.control {
            Some(ctl) if ctl >= q => Err(Error::QubitIndex { index: ctl, qubits: q }),
            Some(ctl) if ctl == self.target => {
                Err(Error::Parameter(format!("control and target are both qubit {ctl}")))
            }
            None if two_qubit => Err(Error::Parameter(format!("{:?} gate needs a control qubit", self.kind))),
            _ => Ok(()),
        }
    }

    /// The 2x2 block applied to the target (when the control, if any, is set).
    pub fn target_matrix(&self) -> Mat2 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self.kind {
            GateKind::X | GateKind::Cnot => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            GateKind::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
            GateKind::Z | GateKind::Cz => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
            GateKind::H => [[c(r, 0.), c(r, 0.)], [c(r, 0.), c(-r, 0.)]],
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.), c(-s, 0.)], [c(s, 0.), c(co, 0.)]]
            }
            GateKind::Cu(u) => u,
        }
    }

    /// Full `2^q x 2^q` matrix of this gate.
    pub fn dense_matrix(&self, q: usize) -> Result<DMatrix<C>> {
        self.validate(q)?;
        let dim = 1usize << q;
        let mut out = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut e = vec![c(0., 0.); dim];
            e[col] = c(1., 0.);
            apply_raw(&mut e, q, self);
            for (row, v) in e.into_iter().enumerate() {
                out[(row, col)] = v;
            }
        }
        Ok(out)
    }
}

fn unitarity_deviation(u: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let v: C = (0..2).map(|k| u[k][i].conj() * u[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - c(want, 0.)).norm());
        }
    }
    worst
}

/// Bit mask of `qubit` in a `q`-qubit index (qubit 0 is the top bit).
#[inline]
pub(crate) fn mask(q: usize, qubit: usize) -> usize {
    1usize << (q - 1 - qubit)
}

/// In-place application; the gate must already be validated.
pub(crate) fn apply_raw(amps: &mut [C], q: usize, gate: &GateOp) {
    let t = mask(q, gate.target);
    let ctl = gate.control.map(|c| mask(q, c)).unwrap_or(0);
    match gate.kind {
        GateKind::X | GateKind::Cnot => {
            for i in 0..amps.len() {
                if i & t == 0 && i & ctl == ctl {
                    amps.swap(i, i | t);
                }
            }
        }
        GateKind::Z | GateKind::Cz => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & t != 0 && i & ctl == ctl {
                    *a = -*a;
                }
            }
        }
        GateKind::Ry(theta) => {
            let (s, co) = (theta / 2.0).sin_cos();
            for i in 0..amps.len() {
                if i & t == 0 && i & ctl == ctl {
                    let (a0, a1) = (amps[i], amps[i | t]);
                    amps[i] = a0 * co - a1 * s;
                    amps[i | t] = a0 * s + a1 * co;
                }
            }
        }
        _ => {
            let u = gate.target_matrix();
            for i in 0..amps.len() {
                if i & t == 0 && i & ctl == ctl {
                    let (a0, a1) = (amps[i], amps[i | t]);
                    amps[i] = u[0][0] * a0 + u[0][1] * a1;
                    amps[i | t] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
        }
    }
}

impl StateVector {
    /// Apply `gate` in place.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.qubits())?;
        let q = self.qubits();
        apply_raw(self.amplitudes_mut(), q, gate);
        Ok(())
    }
}

/// `gate |state>` as a new state.
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}
