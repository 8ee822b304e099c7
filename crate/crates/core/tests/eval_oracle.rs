mod common;

use common::*;
use proptest::prelude::*;
use trec::eval::{ari, paired_t_test, t_cdf};
use trec::vote::simulate_vote_convergence;

#[test]
fn ari_textbook_value_is_exact() {
    assert_eq!(ari(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap().0, -0.5);
}

proptest! {
    #[test]
    fn ari_symmetric_and_relabel_invariant(
        a in prop::collection::vec(0usize..4, 2..60),
        seed in any::<u64>(),
    ) {
        let mut rng = test_rng(seed);
        let b: Vec<usize> = a.iter().map(|_| rand::Rng::random_range(&mut rng, 0..3)).collect();
        let perm = [2usize, 0, 3, 1];
        let relabeled: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        let ab = ari(&a, &b).unwrap().0;
        prop_assert!((ab - ari(&b, &a).unwrap().0).abs() < 1e-12);
        prop_assert!((ab - ari(&relabeled, &b).unwrap().0).abs() < 1e-12);
        prop_assert_eq!(ari(&a, &relabeled).unwrap().0, 1.0);
        prop_assert_eq!(ari(&a, &a).unwrap().0, 1.0);
    }
}

#[test]
fn t_cdf_matches_quadrature() {
    let mut worst: f64 = 0.0;
    for dof in 1..=100 {
        for (t, f) in t_cdf_by_quadrature(dof, 10.0, 0.25, 64) {
            worst = worst.max((t_cdf(t, dof as f64) - f).abs());
            worst = worst.max((t_cdf(-t, dof as f64) - (1.0 - f)).abs());
        }
    }
    assert!(worst < 1e-8, "max deviation {worst:e}");
}

#[test]
fn paired_t_test_matches_hand_computation() {
    let x = [2.0, 4.0, 6.0, 8.0];
    let y = [1.0, 2.0, 3.0, 4.0];
    let r = paired_t_test(&x, &y).unwrap();
    // d = 1..4: mean 2.5, sd √(5/3), t = 2.5 / (sd / 2)
    let t = 2.5 / ((5.0f64 / 3.0).sqrt() / 2.0);
    assert!((r.t_stat - t).abs() < 1e-12);
    assert_eq!(r.dof, 3);
    assert!((r.p_value - 2.0 * (1.0 - t_cdf(t, 3.0))).abs() < 1e-12);
}

#[test]
fn vote_error_tracks_exact_binomial_tail() {
    let trials = 10_000;
    let sizes = [1, 2, 5, 11, 25, 51, 101];
    let sim = simulate_vote_convergence(0.7, &sizes, trials, 17).unwrap();
    for r in &sim {
        let exact = vote_error_exact(r.runs, 0.7);
        let se = (exact * (1.0 - exact) / trials as f64).sqrt().max(1.0 / trials as f64);
        assert!((r.error_rate - exact).abs() <= 4.0 * se, "L={} sim {} exact {}", r.runs, r.error_rate, exact);
    }
}
