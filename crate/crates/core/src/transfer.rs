//! The transfer pipeline: pair meta-features, the kernel pair classifier
//! trained on the source domain and applied to the target, and the greedy
//! projection of the predicted target coincidence matrix onto the set of
//! K-cluster partitions.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{coincidence_from_labels, Dataset, PairKind, PairMatrix, Partition};
use crate::ensemble::{build_ensemble, EnsembleConfig, EnsembleResult};
use crate::error::{Error, Result};
use crate::spectral::{spectral_consensus, SpectralConfig};
use crate::svm::{self, PairClassifier, SvmConfig, TrainStats};

/// Which meta-features feed the pair classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaFeatures {
    #[default]
    Both,
    CoassocOnly,
    SilhouetteOnly,
}

impl MetaFeatures {
    /// `(P, H)` with the unused coordinate held at zero.
    pub fn select(self, p: f64, h: f64) -> [f64; 2] {
        match self {
            MetaFeatures::Both => [p, h],
            MetaFeatures::CoassocOnly => [0.0, h],
            MetaFeatures::SilhouetteOnly => [p, 0.0],
        }
    }
}

impl std::str::FromStr for MetaFeatures {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Self::Both),
            "coassoc_only" | "coassoc-only" => Ok(Self::CoassocOnly),
            "silhouette_only" | "silhouette-only" => Ok(Self::SilhouetteOnly),
            other => Err(Error::InvalidArgument(format!("unknown ablation {other:?}"))),
        }
    }
}

/// Whether the stopping threshold applies to the Frobenius norm or to its
/// square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveScale {
    #[default]
    Norm,
    Squared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrecConfig {
    pub ensemble_source: EnsembleConfig,
    pub ensemble_target: EnsembleConfig,
    pub svm: SvmConfig,
    pub spectral: SpectralConfig,
    pub k_target: usize,
    pub q_min: f64,
    pub it_max: usize,
    #[serde(default)]
    pub q_min_scale: ObjectiveScale,
    #[serde(default)]
    pub meta_features: MetaFeatures,
}

impl Default for TrecConfig {
    fn default() -> Self {
        Self {
            ensemble_source: EnsembleConfig::default(),
            ensemble_target: EnsembleConfig::default(),
            svm: SvmConfig::default(),
            spectral: SpectralConfig::default(),
            k_target: 4,
            q_min: 5.0,
            it_max: 40,
            q_min_scale: ObjectiveScale::Norm,
            meta_features: MetaFeatures::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    QMin,
    ItMax,
    NoImprovingMove,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::QMin => "q_min",
            StopReason::ItMax => "it_max",
            StopReason::NoImprovingMove => "no_improving_move",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub point: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTrace {
    /// Objective before any move, then after each applied move.
    pub objective_per_step: Vec<f64>,
    pub moves: Vec<Move>,
    pub stop_reason: StopReason,
}

/// `P(i, j) = (sil_i + sil_j) / 2`.
pub fn pair_meta_matrix(sil: &[f64]) -> PairMatrix {
    let n = sil.len();
    let values = DMatrix::from_fn(n, n, |i, j| 0.5 * (sil[i] + sil[j]));
    PairMatrix::new(values, PairKind::SilhouettePair).expect("symmetric by construction")
}

/// Frobenius norm of `z_star − z_hat` over the full matrix.
pub fn objective(z_star: &PairMatrix, z_hat: &PairMatrix) -> Result<f64> {
    if z_star.n() != z_hat.n() {
        return Err(Error::SizeMismatch { expected: z_star.n(), got: z_hat.n() });
    }
    Ok((z_star.values() - z_hat.values()).norm())
}

/// Greedy steepest-descent projection of a Boolean pair matrix onto the
/// coincidence matrices of `k`-cluster partitions.
///
/// Each step applies the single point migration with the largest decrease
/// of the objective (ties: lowest point index, then lowest target cluster).
/// Migrations that would empty a cluster are not considered. Stops when the
/// objective (scaled per `scale`) falls below `q_min`, after `it_max`
/// migrations, or when no migration strictly improves it.
pub fn project_to_partition(
    z_hat: &PairMatrix,
    init: &Partition,
    k: usize,
    q_min: f64,
    it_max: usize,
    scale: ObjectiveScale,
) -> Result<(Partition, ProjectionTrace)> {
    let n = z_hat.n();
    if init.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: init.len() });
    }
    if init.k() != k {
        return Err(Error::InvalidArgument(format!("initial partition has {} clusters, expected {k}", init.k())));
    }
    let w = |i: usize, j: usize| -> i64 {
        if z_hat.get(i, j) >= 0.5 {
            1
        } else {
            -1
        }
    };
    let mut assign = init.assign().to_vec();
    let mut sizes = init.sizes();

    // score[i][c] = Σ_{j in c, j != i} (2ẑ_ij − 1)
    let mut score = vec![vec![0i64; k]; n];
    let mut disagree: i64 = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                score[i][assign[j]] += w(i, j);
                if j < i && (assign[i] == assign[j]) != (w(i, j) > 0) {
                    disagree += 1;
                }
            }
        }
    }
    let value = |d: i64| -> f64 {
        match scale {
            ObjectiveScale::Norm => ((2 * d) as f64).sqrt(),
            ObjectiveScale::Squared => (2 * d) as f64,
        }
    };
    let norm = |d: i64| ((2 * d) as f64).sqrt();

    let mut trace = ProjectionTrace {
        objective_per_step: vec![norm(disagree)],
        moves: Vec::new(),
        stop_reason: StopReason::NoImprovingMove,
    };
    loop {
        if value(disagree) < q_min {
            trace.stop_reason = StopReason::QMin;
            break;
        }
        if trace.moves.len() >= it_max {
            trace.stop_reason = StopReason::ItMax;
            break;
        }
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..n {
            let from = assign[i];
            if sizes[from] < 2 {
                continue;
            }
            for to in 0..k {
                if to == from {
                    continue;
                }
                let delta = score[i][from] - score[i][to];
                if delta < 0 && best.is_none_or(|(d, _, _)| delta < d) {
                    best = Some((delta, i, to));
                }
            }
        }
        let Some((delta, i, to)) = best else {
            trace.stop_reason = StopReason::NoImprovingMove;
            break;
        };
        let from = assign[i];
        for (p, row) in score.iter_mut().enumerate() {
            if p != i {
                let wp = w(p, i);
                row[from] -= wp;
                row[to] += wp;
            }
        }
        assign[i] = to;
        sizes[from] -= 1;
        sizes[to] += 1;
        disagree += delta;
        trace.moves.push(Move { point: i, from, to });
        trace.objective_per_step.push(norm(disagree));
    }
    Ok((Partition::new(assign, k)?, trace))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub ensembles_ms: f64,
    pub training_ms: f64,
    pub prediction_ms: f64,
    pub consensus_ms: f64,
    pub projection_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrecReport {
    pub seeds: TrecSeeds,
    pub n_train_pairs: usize,
    pub svm: Option<TrainStats>,
    pub n_support_vectors: usize,
    /// Set when every source pair had the same target class; the EC
    /// partition is then returned unchanged.
    pub degenerate_training: Option<u8>,
    /// Fraction of target pairs predicted as co-clustered.
    pub predicted_positive_rate: Option<f64>,
    pub trace: Option<ProjectionTrace>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrecSeeds {
    pub ensemble_source: u64,
    pub ensemble_target: u64,
    pub svm: u64,
    pub spectral: u64,
}

#[derive(Debug, Clone)]
pub struct TrecOutcome {
    pub partition: Partition,
    /// Consensus partition of the target ensemble alone; the starting point
    /// of the projection.
    pub ec_partition: Partition,
    pub classifier: PairClassifier,
    pub report: TrecReport,
    pub source_ensemble: EnsembleResult,
    pub target_ensemble: EnsembleResult,
}

/// Meta-feature points and coincidence targets over source pairs `i < j`.
pub fn source_training_set(ens: &EnsembleResult, labels: &[usize], meta: MetaFeatures) -> (Vec<[f64; 2]>, Vec<u8>) {
    let n = labels.len();
    let mut feats = Vec::with_capacity(n * (n - 1) / 2);
    let mut targets = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let h = ens.factor.co_count(i, j) as f64 / ens.factor.runs() as f64;
            let p = 0.5 * (ens.sil[i] + ens.sil[j]);
            feats.push(meta.select(p, h));
            targets.push(u8::from(labels[i] == labels[j]));
        }
    }
    (feats, targets)
}

/// Predicted target coincidence matrix: symmetric with unit diagonal
/// regardless of the classifier.
pub fn predict_coincidence(model: &PairClassifier, ens: &EnsembleResult, meta: MetaFeatures) -> PairMatrix {
    let n = ens.sil.len();
    let mut feats = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let h = ens.factor.co_count(i, j) as f64 / ens.factor.runs() as f64;
            let p = 0.5 * (ens.sil[i] + ens.sil[j]);
            feats.push(meta.select(p, h));
        }
    }
    let pred = model.predict(&feats);
    let mut z = DMatrix::from_element(n, n, 1.0);
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            let v = f64::from(pred[idx]);
            z[(i, j)] = v;
            z[(j, i)] = v;
            idx += 1;
        }
    }
    PairMatrix::new(z, PairKind::Prediction).expect("symmetric boolean by construction")
}

/// Runs the full transfer pipeline on a labeled source and a target
/// dataset (target labels, if any, are ignored).
pub fn run_trec(source: &Dataset, target: &Dataset, cfg: &TrecConfig) -> Result<TrecOutcome> {
    let labels = source.labels().ok_or_else(|| Error::InvalidLabels("source dataset must be labeled".into()))?;
    if cfg.k_target < 2 || cfg.k_target > target.n() {
        return Err(Error::InvalidArgument(format!("k_target {} must lie in 2..={}", cfg.k_target, target.n())));
    }
    if source.n() < 2 {
        return Err(Error::InvalidArgument("source needs at least two objects".into()));
    }
    let mut timings = StageTimings::default();

    let clock = Instant::now();
    let (source_ens, target_ens) =
        rayon::join(|| build_ensemble(source, &cfg.ensemble_source), || build_ensemble(target, &cfg.ensemble_target));
    let (source_ens, target_ens) = (source_ens?, target_ens?);
    timings.ensembles_ms = ms(clock);

    let clock = Instant::now();
    let spectral = SpectralConfig { k_final: cfg.k_target, ..cfg.spectral.clone() };
    let ec_partition = spectral_consensus(&target_ens.factor, &spectral)?;
    timings.consensus_ms = ms(clock);

    let seeds = TrecSeeds {
        ensemble_source: cfg.ensemble_source.seed,
        ensemble_target: cfg.ensemble_target.seed,
        svm: cfg.svm.seed,
        spectral: spectral.seed,
    };

    let clock = Instant::now();
    let (feats, targets) = source_training_set(&source_ens, labels, cfg.meta_features);
    let training = match svm::train_detailed(&feats, &targets, &cfg.svm) {
        Ok(t) => t,
        Err(Error::DegenerateTraining(class)) => {
            let report = TrecReport {
                seeds,
                n_train_pairs: feats.len(),
                svm: None,
                n_support_vectors: 0,
                degenerate_training: Some(class),
                predicted_positive_rate: None,
                trace: None,
                timings,
            };
            return Ok(TrecOutcome {
                partition: ec_partition.clone(),
                ec_partition,
                classifier: PairClassifier::constant(class),
                report,
                source_ensemble: source_ens,
                target_ensemble: target_ens,
            });
        }
        Err(e) => return Err(e),
    };
    timings.training_ms = ms(clock);

    let clock = Instant::now();
    let z_hat = predict_coincidence(&training.model, &target_ens, cfg.meta_features);
    timings.prediction_ms = ms(clock);
    let n = z_hat.n();
    let positives = z_hat.values().iter().filter(|&&v| v == 1.0).count() - n;
    let predicted_positive_rate = Some(positives as f64 / (n * (n - 1)) as f64);

    let clock = Instant::now();
    let (partition, trace) =
        project_to_partition(&z_hat, &ec_partition, cfg.k_target, cfg.q_min, cfg.it_max, cfg.q_min_scale)?;
    timings.projection_ms = ms(clock);

    let report = TrecReport {
        seeds,
        n_train_pairs: training.stats.n_train,
        n_support_vectors: training.model.alphas.len(),
        svm: Some(training.stats),
        degenerate_training: None,
        predicted_positive_rate,
        trace: Some(trace),
        timings,
    };
    Ok(TrecOutcome {
        partition,
        ec_partition,
        classifier: training.model,
        report,
        source_ensemble: source_ens,
        target_ensemble: target_ens,
    })
}

/// Consensus partition of the target ensemble alone.
pub fn run_ec(target: &Dataset, ensemble: &EnsembleConfig, spectral: &SpectralConfig) -> Result<Partition> {
    let ens = build_ensemble(target, ensemble)?;
    spectral_consensus(&ens.factor, spectral)
}

/// Coincidence matrix of the source labels.
pub fn source_coincidence(source: &Dataset) -> Result<PairMatrix> {
    source
        .labels()
        .map(coincidence_from_labels)
        .ok_or_else(|| Error::InvalidLabels("source dataset must be labeled".into()))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
