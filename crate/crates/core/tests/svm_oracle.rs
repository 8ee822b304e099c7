mod common;

use common::*;
use rand::Rng;
use trec::svm::{self, KernelConvention, SvmConfig};

/// Random meta-feature-like training set: P in [-1, 1], H in [0, 1], labels
/// from a noisy XOR-ish rule.
pub fn random_set(seed: u64, m: usize) -> (Vec<[f64; 2]>, Vec<u8>) {
    let mut rng = test_rng(seed);
    let x: Vec<[f64; 2]> = (0..m).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0)]).collect();
    let t: Vec<u8> = x
        .iter()
        .map(|p| {
            let rule = (p[0] > 0.0) != (p[1] > 0.5);
            u8::from(rule != rng.random_bool(0.1))
        })
        .collect();
    (x, t)
}

fn signed(t: &[u8]) -> Vec<f64> {
    t.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect()
}

#[test]
fn smo_matches_projected_gradient_on_xor_set() {
    let (x, t) = random_set(5, 200);
    let cfg = SvmConfig { c: 1.0, sigma: 0.5, tol: 1e-5, ..Default::default() };
    let tr = svm::train_detailed(&x, &t, &cfg).unwrap();
    let y = signed(&t);
    let (_, oracle) = svm_dual_pg(&x, &y, cfg.c, cfg.gamma(), 20_000);
    let direct = svm_dual_objective(&x, &y, &tr.alphas, cfg.gamma());
    assert!((direct - tr.stats.dual_objective).abs() < 1e-8);
    assert!((direct - oracle).abs() < 1e-3, "smo {direct} vs oracle {oracle}");
    let eq: f64 = tr.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
    assert!(eq.abs() < 1e-9);
    assert!(tr.alphas.iter().all(|&a| (0.0..=cfg.c).contains(&a)));
    assert!(svm_kkt_gap(&x, &y, &tr.alphas, cfg.c, cfg.gamma()) <= cfg.tol * 1.0001);
}

#[test]
fn prediction_ignores_support_vector_order() {
    let (x, t) = random_set(9, 120);
    let model = svm::train(&x, &t, &SvmConfig { sigma: 0.5, ..Default::default() }).unwrap();
    let mut rev = model.clone();
    rev.support_vectors.reverse();
    rev.alphas.reverse();
    rev.labels.reverse();
    for p in &x {
        assert!((model.decision_value(*p) - rev.decision_value(*p)).abs() < 1e-9);
    }
}

#[test]
fn subsampling_is_deterministic() {
    let (x, t) = random_set(3, 300);
    let cfg = SvmConfig { max_train_pairs: Some(100), seed: 12, ..Default::default() };
    let a = svm::train_detailed(&x, &t, &cfg).unwrap();
    let b = svm::train_detailed(&x, &t, &cfg).unwrap();
    assert_eq!(a.used, b.used);
    assert_eq!(a.used.len(), 100);
    assert_eq!(a.model, b.model);
}

#[test]
fn inverse_width_convention_changes_the_kernel() {
    let (x, t) = random_set(4, 80);
    let w = SvmConfig { sigma: 0.5, ..Default::default() };
    let g = SvmConfig { kernel: KernelConvention::InverseWidth, ..w.clone() };
    let a = svm::train(&x, &t, &w).unwrap();
    let b = svm::train(&x, &t, &g).unwrap();
    assert_ne!(a.decision_value([0.1, 0.2]), b.decision_value([0.1, 0.2]));
}
