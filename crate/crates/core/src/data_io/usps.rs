//! USPS text format: one sample per line, `label v1 ... v256`, whitespace
//! separated. Pixel values come either in `[-1, 1]` or in `[0, 2]`; the range
//! is detected over the whole file and mapped to `[0, 1]`.

use std::path::Path;

use super::RawImages;
use crate::error::{Error, Result};

pub const USPS_SIDE: usize = 16;

/// Affine map to `[0, 1]` picked from the observed value range.
pub fn detect_range(min: f64, max: f64) -> (f64, f64) {
    if min < 0.0 {
        (-1.0, 1.0)
    } else if max > 1.0 {
        (0.0, 2.0)
    } else {
        (0.0, 1.0)
    }
}

pub fn parse_usps(text: &str, path: &Path) -> Result<RawImages> {
    let pixels = USPS_SIDE * USPS_SIDE;
    let mut labels = Vec::new();
    let mut images = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != pixels + 1 {
            return Err(Error::format(
                path,
                format!("line {}: {} columns, expected {}", no + 1, fields.len(), pixels + 1),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(path, format!("line {}: bad number '{s}'", no + 1)))
        };
        let label = num(fields[0])?;
        if label < 0.0 || label.fract() != 0.0 {
            return Err(Error::format(
                path,
                format!("line {}: bad label '{}'", no + 1, fields[0]),
            ));
        }
        labels.push(label as usize);
        images.push(fields[1..].iter().map(|s| num(s)).collect::<Result<Vec<f64>>>()?);
    }
    if images.is_empty() {
        return Err(Error::format(path, "no samples"));
    }
    let (min, max) = images
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (lo, hi) = detect_range(min, max);
    for im in &mut images {
        for v in im.iter_mut() {
            *v = ((*v - lo) / (hi - lo)).clamp(0.0, 1.0);
        }
    }
    RawImages::new(USPS_SIDE, USPS_SIDE, images, labels)
}

pub fn load_usps(path: &Path) -> Result<RawImages> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_usps(&text, path)
}
