//! Adjusted Rand index and the paired Student's t-test.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AriScore(pub f64);

fn comb2(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Hubert-Arabie adjusted Rand index between two labelings. Labels may be
/// arbitrary ids. When the index is undefined (maximum equals expectation)
/// the score is 1 for identical set partitions and 0 otherwise.
pub fn ari(a: &[usize], b: &[usize]) -> Result<AriScore> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), got: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("ARI needs at least two objects".into()));
    }
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
        *cells.entry((x, y)).or_default() += 1;
    }
    // (index − expected) / (max − expected), scaled by 2·C(n, 2) so that
    // everything up to the final division is exact integer arithmetic
    let index: u128 = cells.values().map(|&c| comb2(c)).sum();
    let sum_a: u128 = rows.values().map(|&c| comb2(c)).sum();
    let sum_b: u128 = cols.values().map(|&c| comb2(c)).sum();
    let total = comb2(a.len());
    let num = 2 * index as i128 * total as i128 - 2 * (sum_a * sum_b) as i128;
    let den = (sum_a + sum_b) as i128 * total as i128 - 2 * (sum_a * sum_b) as i128;
    if den == 0 {
        let identical = cells.len() == rows.len() && cells.len() == cols.len();
        return Ok(AriScore(if identical { 1.0 } else { 0.0 }));
    }
    Ok(AriScore(num as f64 / den as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub t_stat: f64,
    pub dof: usize,
    /// Two-sided.
    pub p_value: f64,
    pub mean_diff: f64,
}

/// Paired t-test on `d = x − y`: `t = mean(d) / (sd(d) / √n)` with `n − 1`
/// degrees of freedom.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<PairedTestResult> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let dof = n - 1;
    if var == 0.0 {
        if mean == 0.0 {
            return Ok(PairedTestResult { t_stat: 0.0, dof, p_value: 1.0, mean_diff: 0.0 });
        }
        return Err(Error::DegenerateSample(format!("all {n} differences equal {mean}")));
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    Ok(PairedTestResult { t_stat: t, dof, p_value: two_sided_p(t, dof as f64), mean_diff: mean })
}

/// Student's t CDF with `dof` degrees of freedom.
pub fn t_cdf(t: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof).expect("dof > 0").cdf(t)
}

fn two_sided_p(t: f64, dof: f64) -> f64 {
    // upper tail via symmetry avoids cancellation in 1 − cdf
    (2.0 * t_cdf(-t.abs(), dof)).clamp(0.0, 1.0)
}
