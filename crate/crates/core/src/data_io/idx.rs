//! IDX binary files: a big-endian `u32` magic (`0x0000_08NN`, where `NN` is
//! the number of dimensions), one big-endian `u32` per dimension, then raw
//! unsigned bytes.

use std::path::Path;

use super::RawImages;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Header fields of an IDX file: `(magic, dims)`.
pub fn parse_idx_header(bytes: &[u8], path: &Path) -> Result<(u32, Vec<usize>)> {
    let magic = be_u32(bytes, 0).ok_or_else(|| Error::format(path, "file shorter than the IDX magic"))?;
    if magic >> 8 != 0x08 {
        return Err(Error::format(
            path,
            format!("magic 0x{magic:08x} is not an unsigned-byte IDX file"),
        ));
    }
    let ndim = (magic & 0xff) as usize;
    let dims = (0..ndim)
        .map(|i| be_u32(bytes, 4 + 4 * i).map(|v| v as usize))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::format(path, "truncated IDX header"))?;
    Ok((magic, dims))
}

fn payload<'a>(bytes: &'a [u8], path: &Path, expected_magic: u32) -> Result<(Vec<usize>, &'a [u8])> {
    let (magic, dims) = parse_idx_header(bytes, path)?;
    if magic != expected_magic {
        return Err(Error::format(
            path,
            format!("magic 0x{magic:08x}, expected 0x{expected_magic:08x}"),
        ));
    }
    let start = 4 + 4 * dims.len();
    let len: usize = dims.iter().product();
    let body = &bytes[start..];
    if body.len() != len {
        return Err(Error::format(
            path,
            format!("payload has {} bytes, header promises {len}", body.len()),
        ));
    }
    Ok((dims, body))
}

pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let (dims, body) = payload(bytes, path, IMAGES_MAGIC)?;
    let (rows, cols) = (dims[1], dims[2]);
    let per = rows * cols;
    let images = if per == 0 {
        vec![Vec::new(); dims[0]]
    } else {
        body.chunks_exact(per)
            .map(|img| img.iter().map(|&p| p as f64 / 255.0).collect())
            .collect()
    };
    Ok((rows, cols, images))
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<usize>> {
    let (_, body) = payload(bytes, path, LABELS_MAGIC)?;
    Ok(body.iter().map(|&b| b as usize).collect())
}

/// Images scaled to `[0, 1]` with their labels.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<RawImages> {
    let (rows, cols, images) = parse_idx_images(&read(images_path)?, images_path)?;
    let labels = parse_idx_labels(&read(labels_path)?, labels_path)?;
    if labels.len() != images.len() {
        return Err(Error::format(
            labels_path,
            format!("{} labels for {} images", labels.len(), images.len()),
        ));
    }
    RawImages::new(rows, cols, images, labels)
}

/// Encode images (values in `[0, 1]`, rounded to bytes) and labels as IDX.
pub fn encode_idx(images: &RawImages) -> (Vec<u8>, Vec<u8>) {
    let mut img = IMAGES_MAGIC.to_be_bytes().to_vec();
    for d in [images.len(), images.rows, images.cols] {
        img.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for im in &images.images {
        img.extend(im.iter().map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    let mut lab = LABELS_MAGIC.to_be_bytes().to_vec();
    lab.extend_from_slice(&(images.len() as u32).to_be_bytes());
    lab.extend(images.labels.iter().map(|&l| l as u8));
    (img, lab)
}

pub fn write_idx(images: &RawImages, images_path: &Path, labels_path: &Path) -> Result<()> {
    let (img, lab) = encode_idx(images);
    std::fs::write(images_path, img).map_err(|e| Error::io(images_path, e))?;
    std::fs::write(labels_path, lab).map_err(|e| Error::io(labels_path, e))
}
