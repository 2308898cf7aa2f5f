//! Binary bundle container.
//!
//! ```text
//! magic     8 bytes  "QTFBNDL1"
//! dim       u64 LE   feature rows D
//! n_source  u64 LE
//! n_target  u64 LE
//! classes   u64 LE
//! seed      u64 LE
//! name_len  u64 LE, then name_len UTF-8 bytes
//! features  D * n f64 LE, row-major
//! labels    n u64 LE, source block then target block
//! ```

use std::path::Path;

use nalgebra::DMatrix;

use super::bundle::{DatasetBundle, Domain};
use crate::error::{Error, Result};
use crate::kernel_dda::LabelVector;

const MAGIC: &[u8; 8] = b"QTFBNDL1";

pub fn encode_bundle(bundle: &DatasetBundle, seed: u64) -> Vec<u8> {
    let x = bundle.x.values();
    let (dim, n) = x.shape();
    let mut out = MAGIC.to_vec();
    let name = bundle.name.as_bytes();
    for v in [
        dim as u64,
        bundle.x.n_source() as u64,
        bundle.x.n_target() as u64,
        bundle.y_s.n_classes() as u64,
        seed,
        name.len() as u64,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(name);
    for r in 0..dim {
        for c in 0..n {
            out.extend_from_slice(&x[(r, c)].to_le_bytes());
        }
    }
    for &l in bundle.y_s.as_slice().iter().chain(bundle.truth.unread().as_slice()) {
        out.extend_from_slice(&(l as u64).to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format(self.path, "truncated bundle file"))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn size(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v < 1 << 40)
            .ok_or_else(|| Error::format(self.path, format!("implausible size {v}")))
    }
}

/// Decode a bundle and the seed it was generated with.
pub fn decode_bundle(bytes: &[u8], path: &Path) -> Result<(DatasetBundle, u64)> {
    let mut r = Reader { bytes, at: 0, path };
    if r.take(8)? != MAGIC {
        return Err(Error::format(path, "not a bundle file"));
    }
    let dim = r.size()?;
    let n_s = r.size()?;
    let n_t = r.size()?;
    let classes = r.size()?;
    let seed = r.u64()?;
    let name_len = r.size()?;
    let name = String::from_utf8(r.take(name_len)?.to_vec()).map_err(|_| Error::format(path, "name is not UTF-8"))?;
    let n = n_s + n_t;
    let raw = r.take(dim * n * 8)?;
    let vals: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    let x = DMatrix::from_row_slice(dim, n, &vals);
    let labels = (0..n).map(|_| r.size()).collect::<Result<Vec<_>>>()?;
    if r.at != bytes.len() {
        return Err(Error::format(path, "trailing bytes after bundle payload"));
    }
    let bad = |e: Error| Error::format(path, e.to_string());
    let (src_name, tgt_name) = name.split_once("->").unwrap_or((name.as_str(), ""));
    let source = Domain::new(
        src_name,
        x.columns(0, n_s).into_owned(),
        LabelVector::new(labels[..n_s].to_vec(), classes).map_err(bad)?,
    )
    .map_err(bad)?;
    let target = Domain::new(
        tgt_name,
        x.columns(n_s, n_t).into_owned(),
        LabelVector::new(labels[n_s..].to_vec(), classes).map_err(bad)?,
    )
    .map_err(bad)?;
    let mut bundle = DatasetBundle::from_domains(&source, &target).map_err(bad)?;
    bundle.name = name;
    Ok((bundle.with_provenance("seed", seed), seed))
}

pub fn write_bundle(bundle: &DatasetBundle, seed: u64, path: &Path) -> Result<()> {
    std::fs::write(path, encode_bundle(bundle, seed)).map_err(|e| Error::io(path, e))
}

pub fn read_bundle(path: &Path) -> Result<(DatasetBundle, u64)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_bundle(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::super::synthetic::{gen_synthetic, SyntheticSpec};
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let (a, b) = gen_synthetic(&SyntheticSpec::default(), 5).unwrap();
        let bundle = DatasetBundle::from_domains(&a, &b).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sa_sb.bin");
        write_bundle(&bundle, 5, &path).unwrap();
        let (back, seed) = read_bundle(&path).unwrap();
        assert_eq!(seed, 5);
        assert_eq!(back.name, "S_A->S_B");
        assert_eq!(back.x, bundle.x);
        assert_eq!(back.y_s, bundle.y_s);
        assert_eq!(back.truth.unread(), bundle.truth.unread());
        assert_eq!(bundle.truth.reads(), 0);
    }

    #[test]
    fn corrupt_files_error() {
        let (a, b) = gen_synthetic(&SyntheticSpec::default(), 5).unwrap();
        let bytes = encode_bundle(&DatasetBundle::from_domains(&a, &b).unwrap(), 1);
        let p = Path::new("x");
        assert!(matches!(
            decode_bundle(&bytes[..bytes.len() - 3], p),
            Err(Error::Format { .. })
        ));
        assert!(matches!(decode_bundle(b"NOTABNDL", p), Err(Error::Format { .. })));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_bundle(&extra, p), Err(Error::Format { .. })));
    }

    #[test]
    fn header_is_little_endian() {
        let (a, b) = gen_synthetic(&SyntheticSpec::default(), 5).unwrap();
        let bytes = encode_bundle(&DatasetBundle::from_domains(&a, &b).unwrap(), 258);
        assert_eq!(&bytes[8..16], &4u64.to_le_bytes());
        assert_eq!(&bytes[40..48], &[2, 1, 0, 0, 0, 0, 0, 0]);
    }
}
