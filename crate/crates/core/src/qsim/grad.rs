use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::ansatz::AnsatzCircuit;
use super::gate::{apply_raw, mask, GateKind, GateOp};
use super::observable::{expectation, Observable};
use super::state::StateVector;
use crate::error::{Error, Result};

/// How circuit gradients are evaluated. Both are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Two shifted circuit runs per parameter.
    #[default]
    ParameterShift,
    /// One forward and one reverse sweep regardless of parameter count.
    Adjoint,
}

/// Gradient of `measure(U(theta)|input>)` by the two-term shift rule. Exact
/// whenever `measure` is linear in the density matrix (an expectation value
/// or a measurement probability), since every parameter drives an RY gate.
pub fn parameter_shift_grad_by(
    circ: &AnsatzCircuit,
    input: &StateVector,
    measure: impl Fn(&StateVector) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut work = circ.clone();
    let mut theta = circ.theta().to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let base = theta[j];
        theta[j] = base + FRAC_PI_2;
        work.set_theta(&theta)?;
        let plus = measure(&super::run_ansatz(&work, input)?)?;
        theta[j] = base - FRAC_PI_2;
        work.set_theta(&theta)?;
        let minus = measure(&super::run_ansatz(&work, input)?)?;
        theta[j] = base;
        grad.push(0.5 * (plus - minus));
    }
    Ok(grad)
}

/// `d<H>/d theta_j` for every parameter of `circ`.
pub fn parameter_shift_grad(circ: &AnsatzCircuit, input: &StateVector, obs: &Observable) -> Result<Vec<f64>> {
    parameter_shift_grad_by(circ, input, |s| expectation(s, obs))
}

/// Reverse-mode gradient in one forward and one backward sweep.
///
/// `costate` receives the output state and returns `(f, lambda)` where
/// `lambda` is chosen so that `df = 2 Re <lambda | d psi>`; for
/// `f = <psi|H|psi>` that is `lambda = H psi`.
pub fn adjoint_grad(
    circ: &AnsatzCircuit,
    input: &StateVector,
    costate: impl FnOnce(&StateVector) -> Result<(f64, Vec<Complex64>)>,
) -> Result<(f64, Vec<f64>)> {
    let mut psi = super::run_ansatz(circ, input)?;
    let (value, mut lambda) = costate(&psi)?;
    if lambda.len() != psi.dim() {
        return Err(Error::Dimension(format!(
            "costate has {} entries, state has {}",
            lambda.len(),
            psi.dim()
        )));
    }
    let q = circ.qubits();
    let gates = circ.gates();
    let mut grad = vec![0.0; circ.param_count()];
    let mut slot = grad.len();
    for g in gates.iter().rev() {
        if let GateKind::Ry(_) = g.kind {
            slot -= 1;
            grad[slot] = ry_generator_overlap(&lambda, psi.amplitudes(), q, g.target);
        }
        let inv = inverse(g);
        apply_raw(psi.amplitudes_mut(), q, &inv);
        apply_raw(&mut lambda, q, &inv);
    }
    Ok((value, grad))
}

/// Expectation and its gradient via [`adjoint_grad`].
pub fn expectation_and_grad(circ: &AnsatzCircuit, input: &StateVector, obs: &Observable) -> Result<(f64, Vec<f64>)> {
    adjoint_grad(circ, input, |psi| {
        let hv = obs.apply(psi.amplitudes());
        let e: Complex64 = psi.amplitudes().iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        Ok((e.re, hv))
    })
}

fn inverse(g: &GateOp) -> GateOp {
    match g.kind {
        GateKind::Ry(a) => GateOp::ry(g.target, -a),
        GateKind::Cu(u) => GateOp {
            kind: GateKind::Cu([[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]),
            ..*g
        },
        // remaining kinds are involutions
        _ => *g,
    }
}

/// `2 Re <lambda| (-i Y / 2) psi>` on `target`; `-iY` is the real matrix
/// `[[0, -1], [1, 0]]`, so the factors of two cancel.
fn ry_generator_overlap(lambda: &[Complex64], psi: &[Complex64], q: usize, target: usize) -> f64 {
    let t = mask(q, target);
    let mut acc = 0.0;
    for i in 0..psi.len() {
        if i & t == 0 {
            let j = i | t;
            acc += (lambda[j].conj() * psi[i] - lambda[i].conj() * psi[j]).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{amplitude_encode, run_ansatz, Entangler};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn central_difference(circ: &AnsatzCircuit, input: &StateVector, obs: &Observable, h: f64) -> Vec<f64> {
        let theta = circ.theta().to_vec();
        (0..theta.len())
            .map(|j| {
                let mut tp = theta.clone();
                tp[j] += h;
                let mut tm = theta.clone();
                tm[j] -= h;
                let fp = expectation(&run_ansatz(&circ.with_theta(&tp).unwrap(), input).unwrap(), obs).unwrap();
                let fm = expectation(&run_ansatz(&circ.with_theta(&tm).unwrap(), input).unwrap(), obs).unwrap();
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn cosine_derivative() {
        let z = Observable::pauli_z(1, 0).unwrap();
        let zero = StateVector::zero(1).unwrap();
        let at = |t: f64| {
            let c = AnsatzCircuit::new(1, 1, Entangler::Ring, vec![t]).unwrap();
            parameter_shift_grad(&c, &zero, &z).unwrap()[0]
        };
        assert!((at(PI / 2.0) + 1.0).abs() < 1e-14);
        assert!(at(0.0).abs() < 1e-14);
    }

    fn random_hermitian(q: usize, vals: &[f64]) -> Observable {
        let n = 1 << q;
        let g = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(vals[(i * n + j) % vals.len()], vals[(j * n + i + 7) % vals.len()])
        });
        Observable::dense(&g + g.adjoint()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn shift_rule_matches_finite_differences(
            q in 1usize..5, layers in 1usize..4,
            raw in proptest::collection::vec(-PI..PI, 12),
            amps in proptest::collection::vec(-1.0f64..1.0, 16),
            vals in proptest::collection::vec(-1.0f64..1.0, 61),
            ring in any::<bool>(),
        ) {
            let ent = if ring { Entangler::Ring } else { Entangler::None };
            let c = AnsatzCircuit::new(q, layers, ent, raw[..q * layers].to_vec()).unwrap();
            let input = amplitude_encode(&amps[..1 << q]).unwrap();
            let obs = random_hermitian(q, &vals);
            let ps = parameter_shift_grad(&c, &input, &obs).unwrap();
            let fd = central_difference(&c, &input, &obs, 1e-4);
            for (a, b) in ps.iter().zip(&fd) {
                prop_assert!((a - b).abs() <= 1e-4, "shift {a} vs fd {b}");
            }
            let (e, adj) = expectation_and_grad(&c, &input, &obs).unwrap();
            prop_assert!((e - expectation(&run_ansatz(&c, &input).unwrap(), &obs).unwrap()).abs() < 1e-12);
            for (a, b) in ps.iter().zip(&adj) {
                prop_assert!((a - b).abs() <= 1e-10, "shift {a} vs adjoint {b}");
            }
        }
    }

    #[test]
    fn probability_gradient_by_shift() {
        // P(qubit 0 = 1) after RY(t)|0> is sin^2(t/2); derivative sin(t)/2
        let zero = StateVector::zero(1).unwrap();
        let t = 0.7;
        let c = AnsatzCircuit::new(1, 1, Entangler::Ring, vec![t]).unwrap();
        let g = parameter_shift_grad_by(&c, &zero, |s| s.prob_one(0)).unwrap();
        assert!((g[0] - t.sin() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn costate_length_checked() {
        let c = AnsatzCircuit::zeros(2, 1, Entangler::Ring).unwrap();
        let r = adjoint_grad(&c, &StateVector::zero(2).unwrap(), |_| {
            Ok((0.0, vec![Complex64::new(0.0, 0.0)]))
        });
        assert!(r.is_err());
    }
}
