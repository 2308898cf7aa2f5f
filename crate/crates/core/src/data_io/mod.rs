//! Synthetic domains, digit loaders, preprocessing and a binary cache.

mod bundle;
mod cache;
mod digits;
mod idx;
mod synthetic;
mod usps;

pub use bundle::{DatasetBundle, Domain, TargetTruth};
pub use cache::{decode_bundle, encode_bundle, read_bundle, write_bundle};
pub use digits::{bilinear_resize, digits_domain, preprocess_digits, stratified_indices, DIGIT_CLASSES, DIGIT_SIDE};
pub use idx::{
    encode_idx, load_mnist_idx, parse_idx_header, parse_idx_images, parse_idx_labels, write_idx, IMAGES_MAGIC,
    LABELS_MAGIC,
};
pub use synthetic::{draw_domain, gen_synthetic, SyntheticSpec};
pub use usps::{detect_range, load_usps, parse_usps, USPS_SIDE};

use crate::error::{Error, Result};

/// Grayscale images in `[0, 1]`, row-major, with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImages {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl RawImages {
    pub fn new(rows: usize, cols: usize, images: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Input(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(bad) = images.iter().position(|im| im.len() != rows * cols) {
            return Err(Error::Input(format!("image {bad} does not have {rows}x{cols} pixels")));
        }
        Ok(Self {
            rows,
            cols,
            images,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}
