//! Gates, expectation values and the three gradient routes on a small ansatz.

use qtransfer::qsim::{
    apply_gate, expectation, expectation_and_grad, parameter_shift_grad, run_ansatz, AnsatzCircuit, Entangler, GateOp,
    Observable, StateVector,
};

fn main() -> qtransfer::Result<()> {
    let bell = apply_gate(&apply_gate(&StateVector::zero(2)?, &GateOp::h(0))?, &GateOp::cnot(0, 1))?;
    println!("Bell amplitudes: {:?}", bell.real_parts());

    let q = 3;
    let theta: Vec<f64> = (0..q * 2).map(|i| 0.3 * i as f64 - 0.7).collect();
    let circ = AnsatzCircuit::new(q, 2, Entangler::Ring, theta.clone())?;
    let obs = Observable::pauli_z(q, 0)?;
    let input = StateVector::zero(q)?;
    let out = run_ansatz(&circ, &input)?;
    println!(
        "<Z_0> = {:.6}, norm {:.3e} from one",
        expectation(&out, &obs)?,
        (out.norm_sqr() - 1.0).abs()
    );

    let shift = parameter_shift_grad(&circ, &input, &obs)?;
    let (_, adjoint) = expectation_and_grad(&circ, &input, &obs)?;
    let h = 1e-5;
    let fd: Vec<f64> = (0..theta.len())
        .map(|j| {
            let mut p = theta.clone();
            let mut m = theta.clone();
            p[j] += h;
            m[j] -= h;
            let e = |t: &[f64]| expectation(&run_ansatz(&circ.with_theta(t).unwrap(), &input).unwrap(), &obs).unwrap();
            (e(&p) - e(&m)) / (2.0 * h)
        })
        .collect();
    for j in 0..theta.len() {
        println!(
            "d/dtheta_{j}: shift {:+.6}  adjoint {:+.6}  finite diff {:+.6}",
            shift[j], adjoint[j], fd[j]
        );
    }
    Ok(())
}
