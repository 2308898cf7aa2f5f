//! One-vs-rest variational cascade on a three-class toy embedding.

use nalgebra::DMatrix;
use qtransfer::kernel_dda::LabelVector;
use qtransfer::vq_classifier::{fit_cascade, predict_cascade, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> qtransfer::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = Normal::new(0.0, 0.25).expect("valid std");
    let centres = [(-1.0, 0.0), (1.0, 0.0), (0.0, 1.5)];
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for i in 0..60 {
        let c = i % 3;
        cols.push(centres[c].0 + noise.sample(&mut rng));
        cols.push(centres[c].1 + noise.sample(&mut rng));
        labels.push(c);
    }
    let z = DMatrix::from_column_slice(2, 60, &cols);
    let y = LabelVector::new(labels, 3)?;
    let model = fit_cascade(&z, &y, &TrainConfig::default())?;
    let pred = predict_cascade(&model, &z)?;
    let correct = pred.as_slice().iter().zip(y.as_slice()).filter(|(a, b)| a == b).count();
    println!(
        "training accuracy {correct}/60, residual class {}",
        model.residual_class()
    );
    println!("stages flagged as weak: {:?}", model.flagged_stages());
    Ok(())
}
