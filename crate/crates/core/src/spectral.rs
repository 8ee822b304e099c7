//! Consensus partition by spectral clustering of the co-association matrix,
//! working on the low-rank factor only.
//!
//! With degrees `d = B (Bᵀ 1)` and `B̃ = D^{-1/2} B`, the normalized
//! similarity `D^{-1/2} H D^{-1/2}` equals `B̃ B̃ᵀ`, so its leading
//! eigenvectors are the leading left singular vectors of the N x m matrix
//! `B̃`. They are computed from the eigendecomposition of the m x m Gram
//! matrix `B̃ᵀ B̃`. Cost is `O(N m²)`; the N x N matrix is never
//! formed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::Partition;
use crate::ensemble::CoAssocFactor;
use crate::error::{Error, Result};
use crate::kmeans::kmeans_restarts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub k_final: usize,
    /// Number of eigenvectors kept; defaults to `k_final`.
    pub embed_dim: Option<usize>,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { k_final: 4, embed_dim: None, kmeans_restarts: 10, kmeans_max_iter: 300, kmeans_tol: 1e-9, seed: 0 }
    }
}

/// Leading eigenpairs of the normalized co-association matrix.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// Eigenvalues in decreasing order (squared singular values of `B̃`).
    pub eigenvalues: Vec<f64>,
    /// N x dim matrix of unit eigenvectors, one per column.
    pub vectors: DMatrix<f64>,
}

pub fn spectral_embedding(factor: &CoAssocFactor, dim: usize) -> Result<SpectralEmbedding> {
    let n = factor.n();
    let m = factor.rank_bound();
    if dim == 0 || dim > n.min(m) {
        return Err(Error::InvalidArgument(format!("embedding dimension {dim} must lie in 1..={}", n.min(m))));
    }
    let degrees = factor.degrees();
    // The diagonal of H is 1, so every degree is at least 1.
    assert!(degrees.iter().all(|&d| d >= 1.0), "co-association factor has an isolated object");

    let mut bt = factor.b();
    for (i, d) in degrees.iter().enumerate() {
        bt.row_mut(i).scale_mut(1.0 / d.sqrt());
    }
    // Eigenpairs (λ, v) of the m x m Gram matrix B̃ᵀB̃ give eigenvectors
    // B̃v / √λ of B̃B̃ᵀ. nalgebra's SVD and Householder QR both break down on
    // the exactly dependent columns of B̃.
    let eig = SymmetricEigen::new(bt.transpose() * &bt);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let range: Vec<DVector<f64>> = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > NULL_TOL * lambda_max)
        .map(|&i| &bt * eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt())
        .collect();

    let mut vectors = DMatrix::zeros(n, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut null_basis: Vec<DVector<f64>> = Vec::new();
    for (c, &idx) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[idx];
        let mut col = if c < range.len() {
            eigenvalues.push(lambda);
            range[c].clone()
        } else {
            eigenvalues.push(0.0);
            let v = null_vector(n, range.iter().chain(&null_basis));
            null_basis.push(v.clone());
            v
        };
        // sign convention: largest-magnitude entry positive
        let pivot = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    Ok(SpectralEmbedding { eigenvalues, vectors })
}

/// Relative eigenvalue below which a Gram direction counts as null.
const NULL_TOL: f64 = 1e-12;

/// First unit vector orthogonal to `basis` obtained by orthogonalizing
/// `e_0, e_1, ...` in turn.
fn null_vector<'a>(n: usize, basis: impl Iterator<Item = &'a DVector<f64>> + Clone) -> DVector<f64> {
    for j in 0..n {
        let mut v = DVector::zeros(n);
        v[j] = 1.0;
        // twice for numerical orthogonality
        for _ in 0..2 {
            for b in basis.clone() {
                let dot = b.dot(&v);
                v.axpy(-dot, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 0.5 {
            return v / norm;
        }
    }
    unreachable!("basis spans fewer than n dimensions")
}

/// Final consensus partition into `cfg.k_final` clusters.
pub fn spectral_consensus(factor: &CoAssocFactor, cfg: &SpectralConfig) -> Result<Partition> {
    if cfg.k_final < 2 || cfg.k_final > factor.n() {
        return Err(Error::InvalidArgument(format!("k_final {} must lie in 2..={}", cfg.k_final, factor.n())));
    }
    let dim = cfg.embed_dim.unwrap_or(cfg.k_final).min(factor.rank_bound()).min(factor.n());
    let mut emb = spectral_embedding(factor, dim)?.vectors;
    for mut row in emb.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row.scale_mut(1.0 / norm);
        }
    }
    let fit = kmeans_restarts(&emb, cfg.k_final, cfg.kmeans_restarts, cfg.seed, cfg.kmeans_max_iter, cfg.kmeans_tol)?;
    Ok(fit.partition)
}
