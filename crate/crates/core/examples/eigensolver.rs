//! Variational generalized eigensolver against the dense solver.

use nalgebra::DMatrix;
use qtransfer::kernel_dda::solve_generalized_eigen;
use qtransfer::vqtf::{embed_pair, solve_eigenstates, EigenSolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qtransfer::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 6;
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let h = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = &g * g.transpose() + DMatrix::identity(n, n) * 0.5;
    let b = &h * h.transpose() + DMatrix::identity(n, n);

    let dense = solve_generalized_eigen(&a, &b, 3)?;
    let pair = embed_pair(&a, &b, None)?;
    let cfg = EigenSolverConfig {
        d: 3,
        layers: 6,
        epochs: 1500,
        ..EigenSolverConfig::default()
    };
    let sol = solve_eigenstates(&pair, &cfg)?;
    println!("{} qubits, {} parameters per level", pair.q, cfg.layers * pair.q);
    for (k, level) in sol.levels.iter().enumerate() {
        println!(
            "level {k}: variational {:.5}  dense {:.5}  epochs {}  max B-cosine {:.2e}",
            sol.eigvals[k], dense.values[k], level.epochs_run, level.max_b_cosine
        );
    }
    Ok(())
}
