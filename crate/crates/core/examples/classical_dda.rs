//! TCA, JDA and BDA with their per-iteration pseudo-label traces.

use qtransfer::data_io::{gen_synthetic, DatasetBundle, SyntheticSpec};
use qtransfer::kernel_dda::{dda_fit_predict_observed, DdaConfig, DdaVariant};

fn main() -> qtransfer::Result<()> {
    let (a, b) = gen_synthetic(&SyntheticSpec::default(), 3)?;
    let bundle = DatasetBundle::from_domains(&a, &b)?;
    for variant in [DdaVariant::Tca, DdaVariant::Jda, DdaVariant::Bda] {
        let cfg = DdaConfig::with_variant(variant);
        let out = dda_fit_predict_observed(&bundle.x, &bundle.y_s, &cfg, |rec, _| {
            println!(
                "  {variant:?} iter {}: objective {:.4e}, {} label changes",
                rec.iter, rec.objective, rec.label_changes
            );
        })?;
        println!("{variant:?}: accuracy {:.3}", bundle.truth.accuracy(&out.labels)?);
    }
    Ok(())
}
