//! Classical rebuilds of the block-encoded density operators, the fidelity
//! distance and the resource estimate for a small problem.

use qtransfer::data_io::{gen_synthetic, DatasetBundle, SyntheticSpec};
use qtransfer::kernel_dda::{build_mmd_matrices, compute_kernel, KernelSpec};
use qtransfer::qblas_oracle::{
    fidelity_distance, qblas_tf_reference, resource_report, spectral_rebuild, QblasConfig, SpectralKind,
};

fn main() -> qtransfer::Result<()> {
    let spec = SyntheticSpec {
        n_per_domain: 20,
        ..SyntheticSpec::default()
    };
    let (a, b) = gen_synthetic(&spec, 1)?;
    let bundle = DatasetBundle::from_domains(&a, &b)?;
    let k = compute_kernel(&bundle.x, &KernelSpec::default())?;
    let mats = build_mmd_matrices(20, 20, None, 0.0, 2)?;

    let rho_b = spectral_rebuild(SpectralKind::B, &k, &mats.m, None)?;
    println!(
        "rho_B: gamma {:.3}, success probability {:.3}, deviation {:.2e}",
        rho_b.gamma, rho_b.success_prob, rho_b.deviation
    );
    let rho_a = spectral_rebuild(SpectralKind::A, &k, &mats.l0, None)?;
    println!(
        "rho_A: success probability {:.3}, deviation {:.2e}",
        rho_a.success_prob, rho_a.deviation
    );

    let x0: Vec<f64> = bundle.x.values().column(0).iter().copied().collect();
    let x1: Vec<f64> = bundle.x.values().column(1).iter().copied().collect();
    println!(
        "fidelity distance of the first two samples: {:.4}",
        fidelity_distance(&x0, &x1)?
    );

    let out = qblas_tf_reference(&bundle.x, &bundle.y_s, &QblasConfig::default())?;
    println!("reference pipeline accuracy {:.3}", bundle.truth.accuracy(&out.labels)?);

    let a_mat = &k * &mats.l0 * &k + nalgebra::DMatrix::identity(40, 40);
    let report = resource_report(&k, &a_mat, 1e-2, 20, 2, 1);
    println!("{}", report.to_json()?);
    Ok(())
}
