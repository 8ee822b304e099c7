//! Independent reference computations used by the integration and
//! acceptance tests. Nothing here calls the code paths it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trec::dataset::Partition;

pub fn test_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniformly random labels in `0..k` with every cluster occupied (`k <= n`).
pub fn random_partition(rng: &mut ChaCha20Rng, n: usize, k: usize) -> Partition {
    loop {
        let assign: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        if let Ok(p) = Partition::new(assign, k) {
            return p;
        }
    }
}

/// All assignments of `n` objects to exactly `k` nonempty clusters, one per
/// set partition (restricted growth strings).
pub fn all_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, k: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            if used == k {
                out.push(prefix.clone());
            }
            return;
        }
        let remaining = n - prefix.len();
        if used + remaining < k {
            return;
        }
        for c in 0..(used + 1).min(k) {
            prefix.push(c);
            rec(prefix, n, k, used.max(c + 1), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, k, 0, &mut out);
    out
}

/// Squared Frobenius distance between the coincidence matrix of `assign`
/// and a Boolean matrix, by direct double loop.
pub fn coincidence_distance_sq(assign: &[usize], z: &DMatrix<f64>) -> f64 {
    let n = assign.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let zs = if assign[i] == assign[j] { 1.0 } else { 0.0 };
            s += (zs - z[(i, j)]).powi(2);
        }
    }
    s
}

/// Averaged co-association matrix straight from the definition.
pub fn dense_coassoc(parts: &[Partition]) -> DMatrix<f64> {
    let n = parts[0].len();
    DMatrix::from_fn(n, n, |i, j| {
        let count = parts.iter().filter(|p| p.assign()[i] == p.assign()[j]).count();
        count as f64 / parts.len() as f64
    })
}

/// Eigen-decomposition of `D^{-1/2} H D^{-1/2}`, eigenvalues descending.
pub fn dense_normalized_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / h.row(i).sum().sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Residual of `u` after projection onto the span of dense eigenvectors
/// whose eigenvalues lie within `group_tol` of `lambda`.
pub fn eigenspace_residual(u: &[f64], lambda: f64, values: &[f64], vectors: &DMatrix<f64>, group_tol: f64) -> f64 {
    let n = u.len();
    let mut proj = vec![0.0; n];
    for (c, &v) in values.iter().enumerate() {
        if (v - lambda).abs() <= group_tol {
            let col = vectors.column(c);
            let dot: f64 = (0..n).map(|r| col[r] * u[r]).sum();
            for r in 0..n {
                proj[r] += dot * col[r];
            }
        }
    }
    (0..n).map(|r| (u[r] - proj[r]).powi(2)).sum::<f64>().sqrt()
}

/// Projected accelerated gradient solver for the SVM dual
/// `max 1ᵀα − ½ αᵀQα, 0 ≤ α ≤ C, yᵀα = 0`. Returns `(α, objective)`.
pub fn svm_dual_pg(x: &[[f64; 2]], y: &[f64], c: f64, gamma: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let m = x.len();
    let q = DMatrix::from_fn(m, m, |i, j| {
        let d = (x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2);
        y[i] * y[j] * (-gamma * d).exp()
    });
    // Lipschitz constant by power iteration
    let mut v = DMatrix::from_element(m, 1, 1.0 / (m as f64).sqrt());
    let mut lip = 0.0;
    for _ in 0..500 {
        let w = &q * &v;
        lip = w.norm();
        v = w / lip;
    }
    let step = 1.0 / (lip * 1.01);
    let objective = |a: &DMatrix<f64>| a.sum() - 0.5 * (a.transpose() * &q * a)[(0, 0)];
    let project = |v: &DMatrix<f64>| -> DMatrix<f64> {
        let g = |tau: f64| -> f64 { (0..m).map(|i| y[i] * (v[i] - tau * y[i]).clamp(0.0, c)).sum() };
        let bound = v.amax() + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = 0.5 * (lo + hi);
        DMatrix::from_fn(m, 1, |i, _| (v[i] - tau * y[i]).clamp(0.0, c))
    };
    let mut alpha = DMatrix::zeros(m, 1);
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    let mut best = objective(&alpha);
    for _ in 0..max_iter {
        let grad = DMatrix::from_element(m, 1, 1.0) - &q * &z;
        let next = project(&(&z + grad * step));
        let obj = objective(&next);
        if obj < best - 1e-15 {
            // adaptive restart
            t = 1.0;
            z = alpha.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &alpha) * ((t - 1.0) / t_next);
        let done = (obj - best).abs() < 1e-14 * obj.abs().max(1.0);
        alpha = next;
        best = obj;
        t = t_next;
        if done {
            break;
        }
    }
    (alpha.iter().copied().collect(), best)
}

/// Dual objective `1ᵀα − ½ αᵀQα` evaluated directly.
pub fn svm_dual_objective(x: &[[f64; 2]], y: &[f64], alpha: &[f64], gamma: f64) -> f64 {
    let m = x.len();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            let d = (x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2);
            quad += alpha[i] * alpha[j] * y[i] * y[j] * (-gamma * d).exp();
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Maximal violating pair gap of a dual point, from a freshly computed
/// gradient.
pub fn svm_kkt_gap(x: &[[f64; 2]], y: &[f64], alpha: &[f64], c: f64, gamma: f64) -> f64 {
    let m = x.len();
    let grad: Vec<f64> = (0..m)
        .map(|i| {
            let s: f64 = (0..m)
                .map(|j| {
                    let d = (x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2);
                    y[i] * y[j] * (-gamma * d).exp() * alpha[j]
                })
                .sum();
            s - 1.0
        })
        .collect();
    let eps = 1e-12 * c;
    let up = |t: usize| (y[t] > 0.0 && alpha[t] < c - eps) || (y[t] < 0.0 && alpha[t] > eps);
    let low = |t: usize| (y[t] > 0.0 && alpha[t] > eps) || (y[t] < 0.0 && alpha[t] < c - eps);
    let max_up = (0..m).filter(|&t| up(t)).map(|t| -y[t] * grad[t]).fold(f64::NEG_INFINITY, f64::max);
    let min_low = (0..m).filter(|&t| low(t)).map(|t| -y[t] * grad[t]).fold(f64::INFINITY, f64::min);
    max_up - min_low
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `P[Bin(n, q) = k]`
pub fn binom_pmf(n: usize, k: usize, q: f64) -> f64 {
    let ln =
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln();
    ln.exp()
}

/// Exact majority-vote error for `runs` voters each correct with
/// probability `q`, pairs co-clustered with probability 1/2 and ties
/// resolved as "separate".
pub fn vote_error_exact(runs: usize, q: f64) -> f64 {
    let at_most_half: f64 = (0..=runs / 2).map(|k| binom_pmf(runs, k, q)).sum();
    let below_half: f64 = (0..runs).filter(|&k| 2 * k < runs).map(|k| binom_pmf(runs, k, q)).sum();
    0.5 * (at_most_half + below_half)
}

/// `ln Γ(x)` for half-integer or integer `x ≥ 1/2` by the recurrence from
/// `Γ(1/2) = √π` and `Γ(1) = 1`.
fn ln_gamma_half_integer(x: f64) -> f64 {
    let mut base = if (x.fract() - 0.5).abs() < 1e-12 { 0.5 } else { 1.0 };
    let mut acc = if base == 0.5 { 0.5 * std::f64::consts::PI.ln() } else { 0.0 };
    while base < x - 1e-9 {
        acc += base.ln();
        base += 1.0;
    }
    acc
}

pub fn t_pdf(t: f64, dof: usize) -> f64 {
    let nu = dof as f64;
    let ln_c = ln_gamma_half_integer((nu + 1.0) / 2.0)
        - ln_gamma_half_integer(nu / 2.0)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    (ln_c - (nu + 1.0) / 2.0 * (1.0 + t * t / nu).ln()).exp()
}

/// Student-t CDF at `0, h·s, 2h·s, ...` up to `t_max`, by composite
/// Simpson integration of the density with `intervals_per_step` panels of
/// width `h` between recorded points. Returns `(t, F(t))` pairs for t ≥ 0.
pub fn t_cdf_by_quadrature(dof: usize, t_max: f64, step: f64, intervals_per_step: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.5)];
    let mut acc = 0.5;
    let h = step / intervals_per_step as f64;
    let mut t = 0.0;
    while t < t_max - 1e-12 {
        let mut s = 0.0;
        for k in 0..intervals_per_step {
            let a = t + k as f64 * h;
            s += h / 6.0 * (t_pdf(a, dof) + 4.0 * t_pdf(a + h / 2.0, dof) + t_pdf(a + h, dof));
        }
        acc += s;
        t += step;
        out.push((t, acc));
    }
    out
}

/// Runs `trec` with `args` and panics with its stderr on failure.
pub fn run_cli(args: &[&str]) -> String {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_trec")).args(args).output().expect("spawn trec");
    assert!(out.status.success(), "trec {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Every CSV and SVG file produced by each subcommand, run into a fresh
/// directory with `workers` threads. Returned as `(name, bytes)`, sorted.
pub fn cli_artifacts(root: &std::path::Path, workers: usize) -> Vec<(String, Vec<u8>)> {
    let dir = root.join(format!("w{workers}"));
    let d = dir.to_str().unwrap();
    let w = workers.to_string();
    let sub = |name: &str| format!("{d}/{name}");
    let common = ["--seed", "7", "--workers", &w];
    let gen_out = sub("gen");
    run_cli(&[&["gen", "--out", &gen_out][..], &common].concat());
    let target = format!("{gen_out}/target.csv");
    let source = format!("{gen_out}/source.csv");
    run_cli(&[&["run-ec", "--data", &target, "--labels", "--out", &sub("ec")][..], &common].concat());
    run_cli(
        &[&["run-trec", "--source", &source, "--target", &target, "--labels", "--out", &sub("trec")][..], &common]
            .concat(),
    );
    run_cli(&[&["montecarlo", "--runs", "4", "--out", &sub("mc")][..], &common].concat());
    run_cli(
        &[&["plot", "scatter", "--data", &target, "--labels", "--dims", "2,5", "--out", &sub("plot")][..], &common]
            .concat(),
    );
    run_cli(&[&["plot", "boundary", "--source", &source, "--out", &sub("plot")][..], &common].concat());

    let mut files = Vec::new();
    for sub in std::fs::read_dir(&dir).unwrap() {
        let sub = sub.unwrap().path();
        for f in std::fs::read_dir(&sub).unwrap() {
            let f = f.unwrap().path();
            if matches!(f.extension().and_then(|e| e.to_str()), Some("csv" | "svg")) {
                let name = format!(
                    "{}/{}",
                    sub.file_name().unwrap().to_str().unwrap(),
                    f.file_name().unwrap().to_str().unwrap()
                );
                files.push((name, std::fs::read(&f).unwrap()));
            }
        }
    }
    files.sort();
    files
}
