//! Per-point Silhouette index under the Euclidean metric.

use nalgebra::DMatrix;

use crate::dataset::Partition;
use crate::error::{Error, Result};
use crate::kmeans::{sq_dist, Rows};

/// `s(i) = (b_i - a_i) / max(a_i, b_i)`, with `s(i) = 0` for members of
/// singleton clusters. `a_i` is the mean distance to the rest of `i`'s
/// cluster, `b_i` the smallest mean distance to another cluster.
pub fn silhouette(data: &DMatrix<f64>, part: &Partition) -> Result<Vec<f64>> {
    if data.nrows() != part.len() {
        return Err(Error::SizeMismatch { expected: data.nrows(), got: part.len() });
    }
    Ok(silhouette_rows(&Rows::from_matrix(data), part))
}

pub(crate) fn silhouette_rows(rows: &Rows, part: &Partition) -> Vec<f64> {
    let n = rows.n();
    let k = part.k();
    let assign = part.assign();
    let sizes = part.sizes();
    let mut sums = vec![0.0; k];
    (0..n)
        .map(|i| {
            if sizes[assign[i]] == 1 {
                return 0.0;
            }
            sums.iter_mut().for_each(|s| *s = 0.0);
            for j in 0..n {
                if j != i {
                    sums[assign[j]] += sq_dist(rows.row(i), rows.row(j)).sqrt();
                }
            }
            let own = assign[i];
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k).filter(|&c| c != own).map(|c| sums[c] / sizes[c] as f64).fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 && b.is_finite() {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect()
}
