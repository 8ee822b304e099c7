mod common;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use trec::dataset::{PairKind, PairMatrix, Partition};
use trec::transfer::{objective, project_to_partition, ObjectiveScale, StopReason};

fn random_boolean(rng: &mut rand_chacha::ChaCha20Rng, n: usize) -> PairMatrix {
    let mut m = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in 0..i {
            let v = if rng.random_bool(0.4) { 1.0 } else { 0.0 };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    PairMatrix::new(m, PairKind::Prediction).unwrap()
}

#[test]
fn objective_matches_double_loop() {
    let mut rng = test_rng(1);
    for _ in 0..50 {
        let z = random_boolean(&mut rng, 6);
        let p = random_partition(&mut rng, 6, 2);
        let direct = coincidence_distance_sq(p.assign(), z.values()).sqrt();
        assert!((objective(&p.coincidence(), &z).unwrap() - direct).abs() < 1e-12);
    }
}

#[test]
fn single_misplaced_point_is_corrected_optimally() {
    let mut rng = test_rng(2);
    for _ in 0..30 {
        let truth = random_partition(&mut rng, 8, 2);
        let movable: Vec<usize> = (0..8).filter(|&i| truth.sizes()[truth.assign()[i]] >= 2).collect();
        let i = movable[rng.random_range(0..movable.len())];
        let mut a = truth.assign().to_vec();
        a[i] = 1 - a[i];
        let init = Partition::new(a, 2).unwrap();
        let z = truth.coincidence();
        // enumerate every legal single move and its objective
        let mut best = f64::INFINITY;
        for p in 0..8 {
            let mut b = init.assign().to_vec();
            b[p] = 1 - b[p];
            if let Ok(cand) = Partition::new(b, 2) {
                best = best.min(coincidence_distance_sq(cand.assign(), z.values()));
            }
        }
        assert_eq!(best, 0.0);
        let (out, trace) = project_to_partition(&z, &init, 2, 0.0, 40, ObjectiveScale::Norm).unwrap();
        assert_eq!(trace.moves.len(), 1);
        assert_eq!(trace.moves[0].point, i);
        assert_eq!(*trace.objective_per_step.last().unwrap(), 0.0);
        assert!(out.same_as(&truth));
    }
}

#[test]
fn greedy_never_beats_exhaustive_minimum() {
    let mut rng = test_rng(3);
    let all = all_partitions(10, 2);
    assert_eq!(all.len(), 511);
    let mut reached = 0;
    for _ in 0..40 {
        let z = random_boolean(&mut rng, 10);
        let init = random_partition(&mut rng, 10, 2);
        let (out, trace) = project_to_partition(&z, &init, 2, 0.0, 40, ObjectiveScale::Norm).unwrap();
        let exhaustive =
            all.iter().map(|a| coincidence_distance_sq(a, z.values())).fold(f64::INFINITY, f64::min).sqrt();
        let final_obj = objective(&out.coincidence(), &z).unwrap();
        assert!((final_obj - trace.objective_per_step.last().unwrap()).abs() < 1e-12);
        assert!(final_obj >= exhaustive - 1e-12);
        if (final_obj - exhaustive).abs() < 1e-12 {
            reached += 1;
        }
        assert!(trace.objective_per_step.windows(2).all(|w| w[1] < w[0]));
        assert_ne!(trace.stop_reason, StopReason::QMin);
    }
    assert!(reached > 0);
}

#[test]
fn output_always_has_k_nonempty_clusters() {
    let mut rng = test_rng(4);
    for _ in 0..30 {
        let n = rng.random_range(6..30);
        let k = rng.random_range(2..=4);
        let z = random_boolean(&mut rng, n);
        let init = random_partition(&mut rng, n, k);
        let (out, trace) = project_to_partition(&z, &init, k, 0.0, 15, ObjectiveScale::Norm).unwrap();
        assert_eq!(out.k(), k);
        assert!(out.sizes().iter().all(|&s| s > 0));
        assert!(trace.moves.len() <= 15);
    }
}
