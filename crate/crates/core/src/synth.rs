//! Synthetic four-class benchmark: two spherical Gaussian classes and two
//! strip-shaped classes generated by a noisy random walk along the
//! all-ones direction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed::{self, Normal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussStripModel {
    pub dim: usize,
    pub n_per_class: usize,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub start3: Vec<f64>,
    pub start4: Vec<f64>,
    /// Step added to every coordinate between consecutive strip points.
    pub gamma1: f64,
    /// Variance of the per-coordinate strip noise.
    pub gamma2: f64,
}

impl GaussStripModel {
    /// Builds a model with `mu1 = 0`, `mu2 = center2 * 1`, and strip starts
    /// `(-a, a, -a, a, ...)` / `(a, -a, a, -a, ...)`.
    pub fn symmetric(
        dim: usize,
        n_per_class: usize,
        center2: f64,
        strip_offset: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Self {
        let alternating = |sign: f64| -> Vec<f64> {
            (0..dim).map(|c| if c % 2 == 0 { -sign * strip_offset } else { sign * strip_offset }).collect()
        };
        Self {
            dim,
            n_per_class,
            mu1: vec![0.0; dim],
            mu2: vec![center2; dim],
            start3: alternating(1.0),
            start4: alternating(-1.0),
            gamma1,
            gamma2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.dim < 2 || !self.dim.is_multiple_of(2) {
            return bad(format!("dim must be even and >= 2, got {}", self.dim));
        }
        if self.n_per_class < 2 {
            return bad(format!("n_per_class must be >= 2, got {}", self.n_per_class));
        }
        // gamma2 = 0 is accepted so the noiseless strip geometry can be checked.
        if !(self.gamma1 > 0.0) || !(self.gamma2 >= 0.0) {
            return bad(format!("gamma1 must be > 0 and gamma2 >= 0, got {} / {}", self.gamma1, self.gamma2));
        }
        for v in [&self.mu1, &self.mu2, &self.start3, &self.start4] {
            if v.len() != self.dim {
                return Err(Error::SizeMismatch { expected: self.dim, got: v.len() });
            }
        }
        Ok(())
    }

    pub fn n_total(&self) -> usize {
        4 * self.n_per_class
    }
}

/// Target-domain model: 24 features, 20 objects per class.
pub fn target_model() -> GaussStripModel {
    GaussStripModel::symmetric(24, 20, 8.0, 6.0, 0.2, 0.25)
}

/// Source-domain model: 16 features, 25 objects per class.
pub fn source_model() -> GaussStripModel {
    GaussStripModel::symmetric(16, 25, 6.0, 5.0, 0.2, 0.2)
}

/// Draws a labeled sample, class-blocked: all of class 1, then 2, 3, 4.
pub fn sample(model: &GaussStripModel, seed: u64) -> Result<Dataset> {
    model.validate()?;
    let mut rng = seed::rng(seed);
    let mut normal = Normal::new();
    let (n, d) = (model.n_per_class, model.dim);
    let noise_sd = model.gamma2.sqrt();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(4 * n);
    let mut labels = Vec::with_capacity(4 * n);

    for (class, mu) in [&model.mu1, &model.mu2].into_iter().enumerate() {
        for _ in 0..n {
            rows.push(mu.iter().map(|m| m + normal.sample(&mut rng)).collect());
            labels.push(class);
        }
    }
    for (class, start) in [(2, &model.start3), (3, &model.start4)] {
        let mut x: Vec<f64> = start.iter().map(|s| s + noise_sd * normal.sample(&mut rng)).collect();
        for i in 0..n {
            if i > 0 {
                for v in x.iter_mut() {
                    *v += model.gamma1 + noise_sd * normal.sample(&mut rng);
                }
            }
            rows.push(x.clone());
            labels.push(class);
        }
    }
    let features = DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c]);
    Dataset::new(features, Some(labels), "synthetic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_constants() {
        let m = target_model();
        assert_eq!((m.dim, m.n_per_class, m.n_total()), (24, 20, 80));
        assert!(m.mu1.iter().all(|&v| v == 0.0));
        assert!(m.mu2.iter().all(|&v| v == 8.0));
        assert_eq!((m.gamma1, m.gamma2), (0.2, 0.25));
        assert_eq!(&m.start3[..4], &[-6.0, 6.0, -6.0, 6.0]);
        assert_eq!(&m.start4[..4], &[6.0, -6.0, 6.0, -6.0]);
        assert_eq!(m.start3.len(), 24);
    }

    #[test]
    fn source_constants() {
        let m = source_model();
        assert_eq!((m.dim, m.n_per_class, m.n_total()), (16, 25, 100));
        assert!(m.mu2.iter().all(|&v| v == 6.0));
        assert_eq!((m.gamma1, m.gamma2), (0.2, 0.2));
        assert_eq!(&m.start3[..2], &[-5.0, 5.0]);
        assert_eq!(&m.start4[..2], &[5.0, -5.0]);
    }

    #[test]
    fn sample_is_deterministic_and_balanced() {
        let a = sample(&target_model(), 42).unwrap();
        let b = sample(&target_model(), 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(&target_model(), 43).unwrap());
        let labels = a.labels().unwrap();
        for c in 0..4 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 20);
            assert!(labels[c * 20..(c + 1) * 20].iter().all(|&l| l == c));
        }
    }

    #[test]
    fn noiseless_strip_lies_on_line() {
        let mut m = target_model();
        m.gamma2 = 0.0;
        let ds = sample(&m, 1).unwrap();
        let x = ds.features();
        for (class, start) in [(2, &m.start3), (3, &m.start4)] {
            for t in 0..m.n_per_class {
                for c in 0..m.dim {
                    let expect = start[c] + t as f64 * m.gamma1;
                    assert!((x[(class * 20 + t, c)] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_model_rejected() {
        let mut m = target_model();
        m.dim = 23;
        assert!(sample(&m, 0).is_err());
        let mut m = target_model();
        m.n_per_class = 1;
        assert!(sample(&m, 0).is_err());
    }
}
