use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bundle::{DatasetBundle, Domain};
use super::RawImages;
use crate::error::{Error, Result};
use crate::kernel_dda::LabelVector;

pub const DIGIT_SIDE: usize = 16;
pub const DIGIT_CLASSES: usize = 10;

/// Bilinear resampling with pixel-centre alignment.
pub fn bilinear_resize(img: &[f64], rows: usize, cols: usize, out_rows: usize, out_cols: usize) -> Vec<f64> {
    let sample = |r: f64, c: f64| img[r as usize * cols + c as usize];
    let mut out = Vec::with_capacity(out_rows * out_cols);
    let sy = rows as f64 / out_rows as f64;
    let sx = cols as f64 / out_cols as f64;
    for i in 0..out_rows {
        let y = ((i as f64 + 0.5) * sy - 0.5).clamp(0.0, (rows - 1) as f64);
        let (y0, fy) = (y.floor(), y - y.floor());
        let y1 = (y0 + 1.0).min((rows - 1) as f64);
        for j in 0..out_cols {
            let x = ((j as f64 + 0.5) * sx - 0.5).clamp(0.0, (cols - 1) as f64);
            let (x0, fx) = (x.floor(), x - x.floor());
            let x1 = (x0 + 1.0).min((cols - 1) as f64);
            let top = sample(y0, x0) * (1.0 - fx) + sample(y0, x1) * fx;
            let bottom = sample(y1, x0) * (1.0 - fx) + sample(y1, x1) * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

/// Indices of a class-stratified subsample of size `n`. Each class gets
/// `n / C` samples, the first `n % C` classes one extra.
pub fn stratified_indices(labels: &[usize], n_classes: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l < n_classes {
            by_class[l].push(i);
        }
    }
    let mut picked = Vec::with_capacity(n);
    for (c, members) in by_class.iter_mut().enumerate() {
        let want = n / n_classes + usize::from(c < n % n_classes);
        if members.len() < want {
            return Err(Error::DegenerateData(format!(
                "class {c} has {} samples, {want} requested",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        picked.extend_from_slice(&members[..want]);
    }
    picked.shuffle(&mut rng);
    Ok(picked)
}

/// Resize to 16 x 16, flatten, L2-normalize and subsample.
pub fn digits_domain(name: &str, raw: &RawImages, n: usize, seed: u64) -> Result<Domain> {
    let picks = stratified_indices(&raw.labels, DIGIT_CLASSES, n, seed)?;
    let dim = DIGIT_SIDE * DIGIT_SIDE;
    let mut x = DMatrix::zeros(dim, picks.len());
    let mut labels = Vec::with_capacity(picks.len());
    for (j, &i) in picks.iter().enumerate() {
        let img = if raw.rows == DIGIT_SIDE && raw.cols == DIGIT_SIDE {
            raw.images[i].clone()
        } else {
            bilinear_resize(&raw.images[i], raw.rows, raw.cols, DIGIT_SIDE, DIGIT_SIDE)
        };
        let norm = img.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::DegenerateData(format!("{name} sample {i} is blank")));
        }
        for (r, v) in img.iter().enumerate() {
            x[(r, j)] = v / norm;
        }
        labels.push(raw.labels[i]);
    }
    Domain::new(name, x, LabelVector::new(labels, DIGIT_CLASSES)?)
}

/// `(MNIST -> USPS, USPS -> MNIST)` bundles over a shared 256-dim space.
pub fn preprocess_digits(
    mnist: &RawImages,
    usps: &RawImages,
    n_mnist: usize,
    n_usps: usize,
    seed: u64,
) -> Result<(DatasetBundle, DatasetBundle)> {
    let m = digits_domain("MNIST", mnist, n_mnist, seed)?;
    let u = digits_domain("USPS", usps, n_usps, seed.wrapping_add(1))?;
    let tag = |b: DatasetBundle| b.with_provenance("seed", seed).with_provenance("side", DIGIT_SIDE);
    Ok((
        tag(DatasetBundle::from_domains(&m, &u)?),
        tag(DatasetBundle::from_domains(&u, &m)?),
    ))
}
