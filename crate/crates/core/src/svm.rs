//! Soft-margin RBF support vector classifier over 2-d meta-feature points,
//! trained by sequential minimal optimization.
//!
//! The dual problem solved is
//!
//! ```text
//! min_α  ½ αᵀQα − 1ᵀα   s.t.  0 ≤ α_i ≤ C,  yᵀα = 0,   Q_ij = y_i y_j k(x_i, x_j)
//! ```
//!
//! using second-order working-set selection (the maximal-gain pair among
//! KKT violators). Training stops when the maximal violating pair gap
//! `max_{I_up} −y_t ∇_t − min_{I_low} −y_t ∇_t` drops below `tol`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// How `sigma` enters the RBF kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelConvention {
    /// `exp(−‖u−v‖² / (2σ²))`
    #[default]
    Width,
    /// `exp(−γ‖u−v‖²)` with `γ = 1/σ²`
    InverseWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub sigma: f64,
    #[serde(default)]
    pub kernel: KernelConvention,
    /// Stopping tolerance on the maximal violating pair gap.
    pub tol: f64,
    /// Iteration cap, in units of the training set size.
    pub max_passes: usize,
    /// Larger training sets are reduced by seeded stratified subsampling.
    pub max_train_pairs: Option<usize>,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            sigma: 4.0,
            kernel: KernelConvention::Width,
            tol: 1e-3,
            max_passes: 200,
            max_train_pairs: Some(20_000),
            seed: 0,
        }
    }
}

impl SvmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.sigma > 0.0 && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "svm needs c > 0, sigma > 0, tol > 0 (got {}, {}, {})",
                self.c, self.sigma, self.tol
            )));
        }
        Ok(())
    }

    /// Coefficient `g` in `k(u, v) = exp(−g ‖u−v‖²)`.
    pub fn gamma(&self) -> f64 {
        match self.kernel {
            KernelConvention::Width => 1.0 / (2.0 * self.sigma * self.sigma),
            KernelConvention::InverseWidth => 1.0 / (self.sigma * self.sigma),
        }
    }
}

fn rbf(gamma: f64, u: [f64; 2], v: [f64; 2]) -> f64 {
    let (a, b) = (u[0] - v[0], u[1] - v[1]);
    (-gamma * (a * a + b * b)).exp()
}

/// Trained decision function `f(x) = Σ α_i y_i k(x_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClassifier {
    pub support_vectors: Vec<[f64; 2]>,
    pub alphas: Vec<f64>,
    /// ±1 per support vector.
    pub labels: Vec<f64>,
    pub bias: f64,
    pub sigma: f64,
    pub kernel: KernelConvention,
}

impl PairClassifier {
    /// Classifier that always predicts `class` (0 or 1).
    pub fn constant(class: u8) -> Self {
        Self {
            support_vectors: Vec::new(),
            alphas: Vec::new(),
            labels: Vec::new(),
            bias: if class == 1 { 1.0 } else { -1.0 },
            sigma: 1.0,
            kernel: KernelConvention::Width,
        }
    }

    fn gamma(&self) -> f64 {
        SvmConfig { sigma: self.sigma, kernel: self.kernel, ..SvmConfig::default() }.gamma()
    }

    pub fn decision_value(&self, x: [f64; 2]) -> f64 {
        let g = self.gamma();
        self.support_vectors
            .iter()
            .zip(self.alphas.iter().zip(&self.labels))
            .map(|(sv, (a, y))| a * y * rbf(g, *sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// Hard {0, 1} labels; a decision value of exactly zero maps to 1.
    pub fn predict(&self, features: &[[f64; 2]]) -> Vec<u8> {
        features.iter().map(|&x| u8::from(self.decision_value(x) >= 0.0)).collect()
    }

    /// Plain-text dump: a header block followed by `alpha,label,x0,x1` rows.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kernel = match self.kernel {
            KernelConvention::Width => "width",
            KernelConvention::InverseWidth => "inverse_width",
        };
        writeln!(out, "kernel {kernel}").unwrap();
        writeln!(out, "sigma {}", self.sigma).unwrap();
        writeln!(out, "bias {}", self.bias).unwrap();
        writeln!(out, "support_vectors {}", self.alphas.len()).unwrap();
        for ((sv, a), y) in self.support_vectors.iter().zip(&self.alphas).zip(&self.labels) {
            writeln!(out, "{a},{y},{},{}", sv[0], sv[1]).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |row: usize, msg: &str| Error::Parse { path: "<model>".into(), row, msg: msg.into() };
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<String> {
            let (row, line) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            line.strip_prefix(key).map(|v| v.trim().to_string()).ok_or_else(|| bad(row + 1, &format!("expected {key}")))
        };
        let kernel = match header("kernel")?.as_str() {
            "width" => KernelConvention::Width,
            "inverse_width" => KernelConvention::InverseWidth,
            _ => return Err(bad(1, "unknown kernel")),
        };
        let num = |s: String, row| s.parse::<f64>().map_err(|_| bad(row, "bad number"));
        let sigma = num(header("sigma")?, 2)?;
        let bias = num(header("bias")?, 3)?;
        let count: usize = header("support_vectors")?.parse().map_err(|_| bad(4, "bad count"))?;
        let mut model = Self { support_vectors: vec![], alphas: vec![], labels: vec![], bias, sigma, kernel };
        for (row, line) in lines.take(count) {
            let f: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(row + 1, "bad support vector row"))?;
            if f.len() != 4 {
                return Err(bad(row + 1, "expected 4 fields"));
            }
            model.alphas.push(f[0]);
            model.labels.push(f[1]);
            model.support_vectors.push([f[2], f[3]]);
        }
        if model.alphas.len() != count {
            return Err(bad(0, "missing support vectors"));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub iterations: usize,
    /// Maximal violating pair gap at termination.
    pub kkt_gap: f64,
    /// Dual objective in maximization form, `1ᵀα − ½ αᵀQα`.
    pub dual_objective: f64,
    pub converged: bool,
    pub n_train: usize,
}

/// Full training output, including the dual solution over the points
/// actually used.
#[derive(Debug, Clone)]
pub struct Training {
    pub model: PairClassifier,
    pub stats: TrainStats,
    /// Indices into the caller's training set that were used.
    pub used: Vec<usize>,
    /// Dual coefficients aligned with `used`.
    pub alphas: Vec<f64>,
}

pub fn train(features: &[[f64; 2]], targets: &[u8], cfg: &SvmConfig) -> Result<PairClassifier> {
    train_detailed(features, targets, cfg).map(|t| t.model)
}

pub fn train_detailed(features: &[[f64; 2]], targets: &[u8], cfg: &SvmConfig) -> Result<Training> {
    cfg.validate()?;
    if features.len() != targets.len() {
        return Err(Error::SizeMismatch { expected: features.len(), got: targets.len() });
    }
    if features.len() < 2 {
        return Err(Error::InvalidArgument("need at least two training points".into()));
    }
    if features.iter().any(|x| !x[0].is_finite() || !x[1].is_finite()) {
        return Err(Error::InvalidArgument("non-finite training feature".into()));
    }
    if let Some(&t) = targets.iter().find(|&&t| t > 1) {
        return Err(Error::InvalidArgument(format!("target {t} is not 0 or 1")));
    }
    let positives = targets.iter().filter(|&&t| t == 1).count();
    if positives == 0 || positives == targets.len() {
        return Err(Error::DegenerateTraining(targets[0]));
    }

    let used = match cfg.max_train_pairs {
        Some(cap) if cap < features.len() => stratified_subsample(targets, cap, cfg.seed),
        _ => (0..features.len()).collect(),
    };
    let x: Vec<[f64; 2]> = used.iter().map(|&i| features[i]).collect();
    let y: Vec<f64> = used.iter().map(|&i| if targets[i] == 1 { 1.0 } else { -1.0 }).collect();

    let solution = Smo::new(&x, &y, cfg).solve();
    let sv: Vec<usize> = (0..x.len()).filter(|&i| solution.alpha[i] > 0.0).collect();
    let model = PairClassifier {
        support_vectors: sv.iter().map(|&i| x[i]).collect(),
        alphas: sv.iter().map(|&i| solution.alpha[i]).collect(),
        labels: sv.iter().map(|&i| y[i]).collect(),
        bias: -solution.rho,
        sigma: cfg.sigma,
        kernel: cfg.kernel,
    };
    let stats = TrainStats {
        iterations: solution.iterations,
        kkt_gap: solution.gap,
        dual_objective: solution.dual_objective,
        converged: solution.gap <= cfg.tol,
        n_train: x.len(),
    };
    Ok(Training { model, stats, used, alphas: solution.alpha })
}

/// Keeps `cap` indices, splitting them between the classes in proportion to
/// their frequencies (each class keeps at least one). Returned sorted.
fn stratified_subsample(targets: &[u8], cap: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed::derive_seed(seed, 0, "svm-subsample"));
    let classes: [Vec<usize>; 2] = [0u8, 1].map(|c| (0..targets.len()).filter(|&i| targets[i] == c).collect());
    let total = targets.len() as f64;
    let n_pos =
        ((cap as f64 * classes[1].len() as f64 / total).round() as usize).clamp(1, cap.saturating_sub(1).max(1));
    let quota = [cap - n_pos, n_pos];
    let mut out: Vec<usize> = Vec::with_capacity(cap);
    for c in 0..2 {
        let take = quota[c].min(classes[c].len()).max(1);
        out.extend(rand::seq::index::sample(&mut rng, classes[c].len(), take).into_iter().map(|k| classes[c][k]));
    }
    out.sort_unstable();
    out
}

struct Solution {
    alpha: Vec<f64>,
    rho: f64,
    gap: f64,
    dual_objective: f64,
    iterations: usize,
}

const TAU: f64 = 1e-12;
/// Kernel column cache budget, in f64 entries.
const CACHE_ENTRIES: usize = 1 << 22;

struct Smo<'a> {
    x: &'a [[f64; 2]],
    y: &'a [f64],
    c: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    cache: HashMap<usize, (Vec<f64>, u64)>,
    cache_cap: usize,
    clock: u64,
}

impl<'a> Smo<'a> {
    fn new(x: &'a [[f64; 2]], y: &'a [f64], cfg: &SvmConfig) -> Self {
        let m = x.len();
        Self {
            x,
            y,
            c: cfg.c,
            gamma: cfg.gamma(),
            tol: cfg.tol,
            max_iter: cfg.max_passes.max(1).saturating_mul(m.max(1000)),
            cache: HashMap::new(),
            cache_cap: (CACHE_ENTRIES / m.max(1)).max(2),
            clock: 0,
        }
    }

    /// Kernel column `k(x_·, x_i)`.
    fn column(&mut self, i: usize) -> Vec<f64> {
        self.clock += 1;
        if let Some((col, stamp)) = self.cache.get_mut(&i) {
            *stamp = self.clock;
            return col.clone();
        }
        let xi = self.x[i];
        let col: Vec<f64> = self.x.iter().map(|&xt| rbf(self.gamma, xt, xi)).collect();
        if self.cache.len() >= self.cache_cap {
            let oldest = *self.cache.iter().min_by_key(|(_, (_, s))| *s).map(|(k, _)| k).unwrap();
            self.cache.remove(&oldest);
        }
        self.cache.insert(i, (col.clone(), self.clock));
        col
    }

    fn in_up(&self, t: usize, alpha: &[f64]) -> bool {
        (self.y[t] > 0.0 && alpha[t] < self.c) || (self.y[t] < 0.0 && alpha[t] > 0.0)
    }

    fn in_low(&self, t: usize, alpha: &[f64]) -> bool {
        (self.y[t] > 0.0 && alpha[t] > 0.0) || (self.y[t] < 0.0 && alpha[t] < self.c)
    }

    fn solve(mut self) -> Solution {
        let m = self.x.len();
        let y = self.y;
        let c = self.c;
        let mut alpha = vec![0.0; m];
        // gradient of the minimization objective: Qα − 1
        let mut grad = vec![-1.0; m];
        let mut iterations = 0;
        let mut gap;

        loop {
            // i: maximal −y_t ∇_t over I_up
            let mut i = usize::MAX;
            let mut g_max = f64::NEG_INFINITY;
            let mut g_min = f64::INFINITY;
            for t in 0..m {
                let v = -y[t] * grad[t];
                if self.in_up(t, &alpha) && v > g_max {
                    g_max = v;
                    i = t;
                }
                if self.in_low(t, &alpha) && v < g_min {
                    g_min = v;
                }
            }
            gap = g_max - g_min;
            if i == usize::MAX || gap < self.tol || iterations >= self.max_iter {
                break;
            }
            let ki = self.column(i);
            // j: second-order gain among I_low violators
            let mut j = usize::MAX;
            let mut best = f64::INFINITY;
            for t in 0..m {
                if !self.in_low(t, &alpha) {
                    continue;
                }
                let v = -y[t] * grad[t];
                let b = g_max - v;
                if b > 0.0 {
                    let a = (2.0 - 2.0 * ki[t]).max(TAU);
                    let gain = -(b * b) / a;
                    if gain < best {
                        best = gain;
                        j = t;
                    }
                }
            }
            if j == usize::MAX {
                break;
            }
            let kj = self.column(j);
            iterations += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let quad = (2.0 - 2.0 * ki[j]).max(TAU);
            if y[i] != y[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..m {
                grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
            }
        }

        let rho = self.rho(&alpha, &grad);
        // ½αᵀQα − 1ᵀα = ½ Σ α_t (∇_t − 1)
        let primal_min: f64 = alpha.iter().zip(&grad).map(|(a, g)| 0.5 * a * (g - 1.0)).sum();
        Solution { alpha, rho, gap, dual_objective: -primal_min, iterations }
    }

    fn rho(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..alpha.len() {
            let yg = self.y[t] * grad[t];
            if alpha[t] >= self.c {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}
