use nalgebra::DMatrix;

use super::LabelVector;
use crate::error::{Error, Result};

/// k-nearest-neighbour labels for target columns under Euclidean distance.
/// Ties in distance go to the lower source index.
pub fn knn_predict(z_s: &DMatrix<f64>, y_s: &LabelVector, z_t: &DMatrix<f64>, k: usize) -> Result<LabelVector> {
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
    knn_predict_with(z_s.ncols(), z_t.ncols(), y_s, k, |s, t| {
        crate::linalg::squared_distance(z_s, s, z_t, t)
    })
}

/// Generic neighbour vote over an arbitrary `distance(source_idx, target_idx)`.
///
/// With `k > 1` the majority class wins; a tie between classes goes to the
/// class whose closest member ranks first.
pub fn knn_predict_with(
    n_source: usize,
    n_target: usize,
    y_s: &LabelVector,
    k: usize,
    distance: impl Fn(usize, usize) -> f64,
) -> Result<LabelVector> {
    if n_source == 0 {
        return Err(Error::Input(
            "nearest-neighbour prediction with an empty source set".into(),
        ));
    }
    if k == 0 || k > n_source {
        return Err(Error::Parameter(format!("need 1 <= k <= {n_source}, got {k}")));
    }
    let mut out = Vec::with_capacity(n_target);
    let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(n_source);
    for t in 0..n_target {
        ranked.clear();
        ranked.extend((0..n_source).map(|s| (distance(s, t), s)));
        let label = if k == 1 {
            let (_, best) = ranked.iter().copied().fold((f64::INFINITY, usize::MAX), |acc, cur| {
                if cur.0 < acc.0 || (cur.0 == acc.0 && cur.1 < acc.1) {
                    cur
                } else {
                    acc
                }
            });
            y_s.get(best)
        } else {
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; y_s.n_classes()];
            let mut first_rank = vec![usize::MAX; y_s.n_classes()];
            for (rank, &(_, s)) in ranked.iter().take(k).enumerate() {
                let c = y_s.get(s);
                votes[c] += 1;
                first_rank[c] = first_rank[c].min(rank);
            }
            (0..votes.len())
                .max_by(|&a, &b| votes[a].cmp(&votes[b]).then(first_rank[b].cmp(&first_rank[a])))
                .unwrap_or(0)
        };
        out.push(label);
    }
    LabelVector::new(out, y_s.n_classes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_takes_its_label() {
        let z_s = DMatrix::from_column_slice(2, 3, &[0.0, 0.0, 1.0, 1.0, 5.0, 5.0]);
        let y_s = LabelVector::new(vec![0, 1, 2], 3).unwrap();
        let z_t = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert_eq!(knn_predict(&z_s, &y_s, &z_t, 1).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn equidistant_tie_goes_to_lower_index() {
        let z_s = DMatrix::from_column_slice(1, 2, &[-1.0, 1.0]);
        let y_s = LabelVector::new(vec![1, 0], 2).unwrap();
        let z_t = DMatrix::from_column_slice(1, 1, &[0.0]);
        assert_eq!(knn_predict(&z_s, &y_s, &z_t, 1).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn planted_clusters_match_exhaustive_oracle() {
        let z_s = DMatrix::from_column_slice(2, 5, &[0.0, 0.1, 0.2, -0.1, 3.0, 3.1, 2.9, 3.2, 1.4, 1.6]);
        let y_s = LabelVector::new(vec![0, 0, 1, 1, 0], 2).unwrap();
        let z_t = DMatrix::from_column_slice(2, 3, &[0.05, 0.0, 3.0, 3.0, 1.5, 1.5]);
        let pred = knn_predict(&z_s, &y_s, &z_t, 1).unwrap();
        // brute-force oracle
        let oracle: Vec<usize> = (0..3)
            .map(|t| {
                let mut best = (f64::INFINITY, 0);
                for s in 0..5 {
                    let dx = z_s[(0, s)] - z_t[(0, t)];
                    let dy = z_s[(1, s)] - z_t[(1, t)];
                    let d = (dx * dx + dy * dy).sqrt();
                    if d < best.0 {
                        best = (d, s);
                    }
                }
                y_s.get(best.1)
            })
            .collect();
        assert_eq!(pred.as_slice(), oracle.as_slice());
    }

    #[test]
    fn majority_vote_with_k3() {
        let z_s = DMatrix::from_column_slice(1, 4, &[0.0, 0.2, 0.3, 9.0]);
        let y_s = LabelVector::new(vec![0, 1, 1, 0], 2).unwrap();
        let z_t = DMatrix::from_column_slice(1, 1, &[0.0]);
        assert_eq!(knn_predict(&z_s, &y_s, &z_t, 3).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn empty_source_errors() {
        let y = LabelVector::new(vec![], 1).unwrap();
        assert!(knn_predict_with(0, 1, &y, 1, |_, _| 0.0).is_err());
    }
}
