use serde::{Deserialize, Serialize};

use super::gate::{apply_raw, GateKind, GateOp};
use super::state::{check_qubits, StateVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// CNOT from qubit `i` to `(i + 1) mod q` after the rotations of a layer.
    #[default]
    Ring,
    /// Rotations only; every layer is a product state map.
    None,
}

/// Layered hardware-efficient ansatz: each layer is `RY(theta)` on every
/// qubit followed by the entangler. `theta[l * q + i]` drives qubit `i` in
/// layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCircuit {
    qubits: usize,
    layers: usize,
    entangler: Entangler,
    theta: Vec<f64>,
}

impl AnsatzCircuit {
    pub fn new(qubits: usize, layers: usize, entangler: Entangler, theta: Vec<f64>) -> Result<Self> {
        check_qubits(qubits)?;
        if theta.len() != qubits * layers {
            return Err(Error::Parameter(format!(
                "ansatz with {qubits} qubits and {layers} layers takes {} parameters, got {}",
                qubits * layers,
                theta.len()
            )));
        }
        Ok(Self {
            qubits,
            layers,
            entangler,
            theta,
        })
    }

    pub fn zeros(qubits: usize, layers: usize, entangler: Entangler) -> Result<Self> {
        Self::new(qubits, layers, entangler, vec![0.0; qubits * layers])
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn param_count(&self) -> usize {
        self.theta.len()
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta.len() {
            return Err(Error::Parameter(format!(
                "expected {} parameters, got {}",
                self.theta.len(),
                theta.len()
            )));
        }
        self.theta.copy_from_slice(theta);
        Ok(())
    }

    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.set_theta(theta)?;
        Ok(out)
    }

    fn ring(&self) -> impl Iterator<Item = GateOp> + '_ {
        let q = self.qubits;
        let active = self.entangler == Entangler::Ring && q > 1;
        // with two qubits the ring is 0->1 then 1->0
        (0..if active { q } else { 0 }).map(move |i| GateOp::cnot(i, (i + 1) % q))
    }

    /// Gates of one layer in application order.
    pub fn layer_gates(&self, layer: usize) -> Vec<GateOp> {
        let q = self.qubits;
        let mut out: Vec<GateOp> = (0..q).map(|i| GateOp::ry(i, self.theta[layer * q + i])).collect();
        out.extend(self.ring());
        out
    }

    /// Full gate list; parameterized gates appear in `theta` order.
    pub fn gates(&self) -> Vec<GateOp> {
        (0..self.layers).flat_map(|l| self.layer_gates(l)).collect()
    }

    fn check_input(&self, input: &StateVector) -> Result<()> {
        if input.qubits() != self.qubits {
            return Err(Error::Dimension(format!(
                "circuit acts on {} qubits, input state has {}",
                self.qubits,
                input.qubits()
            )));
        }
        Ok(())
    }

    /// `U(theta)^dagger |state>`: gates reversed with negated angles.
    pub fn apply_inverse(&self, state: &mut StateVector) -> Result<()> {
        self.check_input(state)?;
        let q = self.qubits;
        for g in self.gates().iter().rev() {
            let inv = match g.kind {
                GateKind::Ry(a) => GateOp::ry(g.target, -a),
                _ => *g,
            };
            apply_raw(state.amplitudes_mut(), q, &inv);
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.check_input(state)?;
        let q = self.qubits;
        for g in self.gates() {
            apply_raw(state.amplitudes_mut(), q, &g);
        }
        Ok(())
    }
}

/// `U(theta) |input>`.
pub fn run_ansatz(circ: &AnsatzCircuit, input: &StateVector) -> Result<StateVector> {
    let mut out = input.clone();
    circ.apply(&mut out)?;
    Ok(out)
}
