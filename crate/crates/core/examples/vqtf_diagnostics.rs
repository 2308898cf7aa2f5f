//! Per-level diagnostics of a VQTF run as JSON lines.

use qtransfer::data_io::{gen_synthetic, DatasetBundle, SyntheticSpec};
use qtransfer::vqtf::{diagnostics_jsonl, vqtf_fit_predict_observed, VqtfConfig};

fn main() -> qtransfer::Result<()> {
    let (a, b) = gen_synthetic(&SyntheticSpec::default(), 7)?;
    let bundle = DatasetBundle::from_domains(&b, &a)?;
    let out = vqtf_fit_predict_observed(&bundle.x, &bundle.y_s, &VqtfConfig::default(), |it, _| {
        eprintln!("iteration {}: eigenvalues {:?}", it.iter, it.eigvals);
    })?;
    print!("{}", diagnostics_jsonl(&out.history)?);
    eprintln!("accuracy {:.3}", bundle.truth.accuracy(&out.labels)?);
    Ok(())
}
