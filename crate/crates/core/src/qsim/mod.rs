//! Dense statevector simulation of RY/CNOT circuits with exact expectation
//! values and gradients.

mod ansatz;
mod gate;
mod grad;
mod observable;
mod state;

pub use ansatz::{run_ansatz, AnsatzCircuit, Entangler};
pub use gate::{apply_gate, GateKind, GateOp, Mat2};
pub use grad::{adjoint_grad, expectation_and_grad, parameter_shift_grad, parameter_shift_grad_by, GradientMethod};
pub use observable::{expectation, Observable};
pub use state::{amplitude_encode, qubits_for, StateVector, MAX_QUBITS};
