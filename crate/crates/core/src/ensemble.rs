//! Random-subspace k-means ensembles and the averaged co-association matrix
//! in factored form.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, PairKind, PairMatrix, Partition};
use crate::error::{Error, Result};
use crate::kmeans::{kmeans_rows, Rows};
use crate::seed;
use crate::silhouette::silhouette_rows;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Number of base clusterings `L`.
    pub runs: usize,
    pub k_per_run: usize,
    /// Features drawn without replacement for each run.
    pub subspace_size: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { runs: 10, k_per_run: 4, subspace_size: 3, kmeans_max_iter: 100, kmeans_tol: 1e-6, seed: 0 }
    }
}

impl EnsembleConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one run".into()));
        }
        if self.subspace_size == 0 || self.subspace_size > d {
            return Err(Error::InvalidArgument(format!("subspace size {} must lie in 1..={d}", self.subspace_size)));
        }
        if self.k_per_run < 2 {
            return Err(Error::InvalidArgument(format!("k_per_run must be >= 2, got {}", self.k_per_run)));
        }
        if !(self.kmeans_tol > 0.0) {
            return Err(Error::InvalidArgument("kmeans_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Low-rank factor `B` of the averaged co-association matrix, `H = B Bᵀ`.
///
/// Column block `l` of `B` is the one-hot encoding of partition `l` scaled by
/// `1/√L`. The factor is stored as the per-run cluster ids; [`Self::b`]
/// materializes the N x m matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoAssocFactor {
    labels: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    sizes: Vec<Vec<usize>>,
    n: usize,
}

impl CoAssocFactor {
    pub fn from_partitions(parts: &[Partition]) -> Result<Self> {
        let n = parts.first().map(Partition::len).ok_or_else(|| Error::InvalidArgument("no partitions".into()))?;
        let mut offsets = Vec::with_capacity(parts.len() + 1);
        offsets.push(0);
        for p in parts {
            if p.len() != n {
                return Err(Error::SizeMismatch { expected: n, got: p.len() });
            }
            offsets.push(offsets.last().unwrap() + p.k());
        }
        Ok(Self {
            labels: parts.iter().map(|p| p.assign().to_vec()).collect(),
            sizes: parts.iter().map(Partition::sizes).collect(),
            offsets,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of runs `L`.
    pub fn runs(&self) -> usize {
        self.labels.len()
    }

    /// Total column count `m = Σ K_l`.
    pub fn rank_bound(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Value of every nonzero entry of `B`.
    pub fn scale(&self) -> f64 {
        1.0 / (self.runs() as f64).sqrt()
    }

    /// Unscaled 0/1 indicator matrix; `B = scale * indicator`.
    pub fn indicator(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.rank_bound());
        for (l, labels) in self.labels.iter().enumerate() {
            for (i, &c) in labels.iter().enumerate() {
                m[(i, self.offsets[l] + c)] = 1.0;
            }
        }
        m
    }

    pub fn b(&self) -> DMatrix<f64> {
        self.indicator() * self.scale()
    }

    /// Number of runs placing `i` and `j` in the same cluster.
    pub fn co_count(&self, i: usize, j: usize) -> usize {
        self.labels.iter().filter(|l| l[i] == l[j]).count()
    }

    /// `H(i, j) = row_i(B) · row_j(B)`, the fraction of runs co-clustering
    /// `i` and `j`.
    pub fn coassoc_entry(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange { i, j, n: self.n });
        }
        Ok(self.co_count(i, j) as f64 / self.runs() as f64)
    }

    /// Row sums of `H`, computed as `B (Bᵀ 1)` from cluster sizes.
    pub fn degrees(&self) -> Vec<f64> {
        let runs = self.runs() as f64;
        (0..self.n)
            .map(|i| self.labels.iter().zip(&self.sizes).map(|(l, s)| s[l[i]] as f64).sum::<f64>() / runs)
            .collect()
    }

    /// Dense `H`; quadratic in N.
    pub fn dense(&self) -> PairMatrix {
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            h[(i, i)] = 1.0;
            for j in 0..i {
                let v = self.co_count(i, j) as f64 / self.runs() as f64;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        PairMatrix::new(h, PairKind::Coassoc).expect("co-association invariants hold by construction")
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub partitions: Vec<Partition>,
    pub subspaces: Vec<Vec<usize>>,
    pub factor: CoAssocFactor,
    /// Silhouette of each object averaged over runs, each run scored in its
    /// own feature subspace.
    pub sil: Vec<f64>,
}

/// Runs `cfg.runs` k-means clusterings, each on a random feature subset.
/// Run `l` draws from a generator seeded by `(cfg.seed, l)`, so the result
/// does not depend on thread scheduling.
pub fn build_ensemble(data: &Dataset, cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    cfg.validate(data.d())?;
    if cfg.k_per_run > data.n() {
        return Err(Error::InvalidArgument(format!("k_per_run {} exceeds N = {}", cfg.k_per_run, data.n())));
    }
    let members: Vec<(Vec<usize>, Partition, Vec<f64>)> = (0..cfg.runs)
        .into_par_iter()
        .map(|l| {
            let mut rng = seed::rng(seed::derive_seed(cfg.seed, l as u64, "ensemble-run"));
            let mut cols = rand::seq::index::sample(&mut rng, data.d(), cfg.subspace_size).into_vec();
            cols.sort_unstable();
            let rows = Rows::from_columns(data.features(), &cols);
            let fit = kmeans_rows(&rows, cfg.k_per_run, &mut rng, cfg.kmeans_max_iter, cfg.kmeans_tol)?;
            let sil = silhouette_rows(&rows, &fit.partition);
            Ok((cols, fit.partition, sil))
        })
        .collect::<Result<_>>()?;

    let n = data.n();
    let mut sil = vec![0.0; n];
    for (_, _, s) in &members {
        for (acc, v) in sil.iter_mut().zip(s) {
            *acc += v;
        }
    }
    sil.iter_mut().for_each(|v| *v /= cfg.runs as f64);
    let (subspaces, partitions): (Vec<_>, Vec<_>) = members.into_iter().map(|(c, p, _)| (c, p)).unzip();
    let factor = CoAssocFactor::from_partitions(&partitions)?;
    Ok(EnsembleResult { partitions, subspaces, factor, sil })
}
