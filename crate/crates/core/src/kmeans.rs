//! Lloyd's k-means with k-means++ seeding.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::dataset::Partition;
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

/// Row-major copy of an N x d matrix.
#[derive(Debug, Clone)]
pub(crate) struct Rows {
    pub data: Vec<f64>,
    pub d: usize,
}

impl Rows {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let (n, d) = m.shape();
        let mut data = Vec::with_capacity(n * d);
        for r in 0..n {
            data.extend(m.row(r).iter());
        }
        Self { data, d }
    }

    /// Row-major copy restricted to the given columns.
    pub fn from_columns(m: &DMatrix<f64>, cols: &[usize]) -> Self {
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * cols.len());
        for r in 0..n {
            data.extend(cols.iter().map(|&c| m[(r, c)]));
        }
        Self { data, d: cols.len() }
    }

    pub fn n(&self) -> usize {
        self.data.len().checked_div(self.d).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: Partition,
    /// Row-major k x d cluster centroids.
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after each iteration.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn wcss(&self) -> f64 {
        *self.cost_history.last().expect("at least one iteration")
    }
}

/// Single k-means run on the rows of `data`.
pub fn kmeans(data: &DMatrix<f64>, k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<KMeansFit> {
    kmeans_rows(&Rows::from_matrix(data), k, &mut seed::rng(seed), max_iter, tol)
}

/// Best of `restarts` runs by final WCSS; restart `r` uses a seed derived
/// from `(seed, r)`. Ties keep the earliest restart.
pub fn kmeans_restarts(
    data: &DMatrix<f64>,
    k: usize,
    restarts: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansFit> {
    let rows = Rows::from_matrix(data);
    let mut best: Option<KMeansFit> = None;
    for r in 0..restarts.max(1) {
        let mut rng = seed::rng(seed::derive_seed(seed, r as u64, "kmeans-restart"));
        let fit = kmeans_rows(&rows, k, &mut rng, max_iter, tol)?;
        if best.as_ref().is_none_or(|b| fit.wcss() < b.wcss()) {
            best = Some(fit);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

pub(crate) fn kmeans_rows(rows: &Rows, k: usize, rng: &mut Rng, max_iter: usize, tol: f64) -> Result<KMeansFit> {
    let n = rows.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let d = rows.d;
    let mut centers = plus_plus(rows, k, rng);
    let mut assign = vec![0usize; n];
    let mut dist = vec![0.0; n];
    let mut cost_history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter.max(1) {
        iterations += 1;
        for i in 0..n {
            let (best, bd) = nearest(rows.row(i), &centers);
            assign[i] = best;
            dist[i] = bd;
        }
        repair_empty(&mut assign, &mut dist, &mut centers, rows);

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i]].iter_mut().zip(rows.row(i)) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&new, &centers[c]).sqrt());
            centers[c] = new;
        }
        let cost = (0..n).map(|i| sq_dist(rows.row(i), &centers[assign[i]])).sum();
        cost_history.push(cost);
        if shift < tol {
            break;
        }
    }

    Ok(KMeansFit { partition: Partition::from_raw(assign, k), centers, cost_history, iterations })
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let dd = sq_dist(x, center);
        if dd < best.1 {
            best = (c, dd);
        }
    }
    best
}

/// Each empty cluster claims the point farthest from its current center,
/// taken from a cluster that keeps at least one member.
fn repair_empty(assign: &mut [usize], dist: &mut [f64], centers: &mut [Vec<f64>], rows: &Rows) {
    let k = centers.len();
    let mut counts = vec![0usize; k];
    for &a in assign.iter() {
        counts[a] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut far: Option<usize> = None;
        for i in 0..assign.len() {
            if counts[assign[i]] >= 2 && far.is_none_or(|f| dist[i] > dist[f]) {
                far = Some(i);
            }
        }
        let i = far.expect("k <= n guarantees a donor cluster");
        counts[assign[i]] -= 1;
        counts[c] += 1;
        assign[i] = c;
        dist[i] = 0.0;
        centers[c] = rows.row(i).to_vec();
    }
}

fn plus_plus(rows: &Rows, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = rows.n();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![rows.row(first).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(rows.row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the accumulated sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // all remaining points coincide with a center
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        let c = rows.row(pick).to_vec();
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(sq_dist(rows.row(i), &c));
        }
        centers.push(c);
    }
    centers
}
