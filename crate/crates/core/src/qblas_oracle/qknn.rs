use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel_dda::{knn_predict_with, LabelVector};

/// `sqrt(2 - 2 |<x|y>|)` on the normalized inputs. Invariant under a sign
/// flip of either argument, so it measures distance between rays.
pub fn fidelity_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let nx = norm(x)?;
    let ny = norm(y)?;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(overlap_distance(dot / (nx * ny)))
}

fn overlap_distance(overlap: f64) -> f64 {
    (2.0 - 2.0 * overlap.abs().min(1.0)).max(0.0).sqrt()
}

fn norm(x: &[f64]) -> Result<f64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else {
        Err(Error::Encoding(format!("vector norm {n} cannot be normalized")))
    }
}

fn unit_columns(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = z.clone();
    for mut c in out.column_iter_mut() {
        let n = c.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Encoding(format!("column norm {n} cannot be normalized")));
        }
        c /= n;
    }
    Ok(out)
}

/// Nearest-neighbour labels under [`fidelity_distance`]; exhaustive search,
/// ties to the lowest source index.
pub fn qknn_predict(z_s: &DMatrix<f64>, y_s: &LabelVector, z_t: &DMatrix<f64>, k: usize) -> Result<LabelVector> {
    if z_s.nrows() != z_t.nrows() {
        return Err(Error::Dimension(format!(
            "source embedding has {} rows, target has {}",
            z_s.nrows(),
            z_t.nrows()
        )));
    }
    if z_s.ncols() != y_s.len() {
        return Err(Error::Dimension(format!(
            "{} source columns but {} labels",
            z_s.ncols(),
            y_s.len()
        )));
    }
    let us = unit_columns(z_s)?;
    let ut = unit_columns(z_t)?;
    let overlaps = us.transpose() * ut;
    knn_predict_with(z_s.ncols(), z_t.ncols(), y_s, k, |s, t| {
        overlap_distance(overlaps[(s, t)])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_values() {
        assert_eq!(fidelity_distance(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert!((fidelity_distance(&[1.0, 0.0], &[0.0, 2.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let d = fidelity_distance(&[1.0, 0.0], &[h, h]).unwrap();
        assert!((d - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!((d - 0.7654).abs() < 1e-4);
        assert!(fidelity_distance(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn antipodal_vectors_share_a_label() {
        let z_s = DMatrix::from_column_slice(2, 2, &[1.0, 0.2, -0.3, 1.0]);
        let y_s = LabelVector::new(vec![0, 1], 2).unwrap();
        let z_t = DMatrix::from_column_slice(2, 2, &[-1.0, -0.2, 0.3, -1.0]);
        assert_eq!(qknn_predict(&z_s, &y_s, &z_t, 1).unwrap().as_slice(), &[0, 1]);
        assert_eq!(qknn_predict(&z_s, &y_s, &z_s, 1).unwrap().as_slice(), &[0, 1]);
    }

    #[test]
    fn planted_clusters_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let centers = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let sample = |rng: &mut ChaCha8Rng, c: usize| -> Vec<f64> {
            centers[c].iter().map(|v| v + rng.random_range(-0.3..0.3)).collect()
        };
        let mut s = Vec::new();
        let mut labels = Vec::new();
        for i in 0..15 {
            s.extend(sample(&mut rng, i % 3));
            labels.push(i % 3);
        }
        let mut t = Vec::new();
        for i in 0..12 {
            t.extend(sample(&mut rng, i % 3));
        }
        let z_s = DMatrix::from_column_slice(3, 15, &s);
        let z_t = DMatrix::from_column_slice(3, 12, &t);
        let y_s = LabelVector::new(labels.clone(), 3).unwrap();
        let got = qknn_predict(&z_s, &y_s, &z_t, 1).unwrap();
        for j in 0..12 {
            let tj: Vec<f64> = z_t.column(j).iter().copied().collect();
            let mut best = (f64::INFINITY, 0);
            for i in 0..15 {
                let si: Vec<f64> = z_s.column(i).iter().copied().collect();
                let d = fidelity_distance(&si, &tj).unwrap();
                if d < best.0 {
                    best = (d, i);
                }
            }
            assert_eq!(got.get(j), labels[best.1]);
        }
    }

    fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn pseudometric_on_rays(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y, z) = (unit(&mut rng, n), unit(&mut rng, n), unit(&mut rng, n));
            prop_assume!(norm(&x).is_ok() && norm(&y).is_ok() && norm(&z).is_ok());
            let dxy = fidelity_distance(&x, &y).unwrap();
            let dyx = fidelity_distance(&y, &x).unwrap();
            let dyz = fidelity_distance(&y, &z).unwrap();
            let dxz = fidelity_distance(&x, &z).unwrap();
            prop_assert!((dxy - dyx).abs() <= 1e-15);
            prop_assert!(dxy >= 0.0 && dxy <= 2f64.sqrt() + 1e-15);
            prop_assert!(dxz <= dxy + dyz + 1e-12);
            let neg: Vec<f64> = x.iter().map(|v| -2.5 * v).collect();
            prop_assert!(fidelity_distance(&x, &neg).unwrap() <= 1e-7);
        }
    }
}
