//! NA, BDA and VQTF on the two synthetic 2-qubit domains.

use qtransfer::data_io::{gen_synthetic, DatasetBundle, SyntheticSpec};
use qtransfer::kernel_dda::{dda_fit_predict, no_adaptation, DdaConfig};
use qtransfer::vqtf::{vqtf_fit_predict, VqtfConfig};

fn main() -> qtransfer::Result<()> {
    let (a, b) = gen_synthetic(&SyntheticSpec::default(), 7)?;
    for (src, tgt) in [(&a, &b), (&b, &a)] {
        let bundle = DatasetBundle::from_domains(src, tgt)?;
        let na = no_adaptation(&bundle.x, &bundle.y_s, 1)?;
        let bda = dda_fit_predict(&bundle.x, &bundle.y_s, &DdaConfig::default())?;
        let vq = vqtf_fit_predict(&bundle.x, &bundle.y_s, &VqtfConfig::default())?;
        println!(
            "{:<10} NA {:.3}  BDA {:.3}  VQTF {:.3} ({} outer iterations)",
            bundle.name,
            bundle.truth.accuracy(&na)?,
            bundle.truth.accuracy(&bda.labels)?,
            bundle.truth.accuracy(&vq.labels)?,
            vq.history.len()
        );
    }
    Ok(())
}
