//! Transfer ensemble clustering.
//!
//! A labeled source dataset and an unlabeled target dataset, possibly with
//! different feature spaces, are each clustered by a random-subspace k-means
//! ensemble. Two pair-level meta-features are extracted from each ensemble:
//! the co-association frequency `H(i, j)` and the mean ensemble Silhouette
//! `P(i, j)`. A kernel classifier learns the map from source meta-features to
//! the source coincidence matrix and is transferred to the target, and the
//! predicted target coincidence matrix is projected onto a valid K-cluster
//! partition by greedy point migration, starting from the spectral consensus
//! of the target ensemble.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`dataset`] | Feature matrices, partitions, pair matrices, CSV I/O |
//! | [`synth`] | Gaussian/strip synthetic benchmark generator |
//! | [`kmeans`], [`silhouette`], [`ensemble`] | Base clusterer and ensemble |
//! | [`vote`] | Majority-vote error simulation |
//! | [`spectral`] | Consensus from the low-rank co-association factor |
//! | [`svm`] | SMO-trained RBF pair classifier |
//! | [`transfer`] | Meta-features, projection, end-to-end pipeline |
//! | [`eval`] | Adjusted Rand index, paired t-test |
//! | [`experiment`] | Monte Carlo harness and run reports |
//! | [`plot`] | SVG scatter and decision-boundary figures |

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod kmeans;
pub mod plot;
pub mod seed;
pub mod silhouette;
pub mod spectral;
pub mod svm;
pub mod synth;
pub mod transfer;
pub mod vote;

pub use dataset::{Dataset, PairKind, PairMatrix, Partition};
pub use error::{Error, Result};
