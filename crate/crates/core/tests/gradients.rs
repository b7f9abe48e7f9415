use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfw_core::data::{normalize_labels, synthetic, Dataset};
use sfw_core::objectives::{LossKind, Objective};
use sfw_core::oracle::{finite_diff_grad, finite_diff_sample_grad};

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-8)
}

fn dataset(kind: LossKind) -> Dataset {
    normalize_labels(synthetic::random_sparse(200, 8, 0.5, 1.0, 42), kind).unwrap()
}

#[test]
fn sample_gradients_match_central_differences() {
    for kind in [LossKind::Logistic, LossKind::Nlls] {
        let ds = dataset(kind);
        let obj = Objective::new(kind, &ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let i = rng.gen_range(0..obj.n());
            let w: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = obj.grad_sample(i, &w).unwrap();
            let fd = finite_diff_sample_grad(&obj, i, &w, 1e-5);
            worst = worst.max(rel_err(&fd, &g));
        }
        assert!(worst <= 1e-5, "{kind}: worst relative error {worst}");
    }
}

#[test]
fn full_gradient_at_origin_matches_central_differences() {
    for kind in [LossKind::Logistic, LossKind::Nlls] {
        let ds = dataset(kind);
        let obj = Objective::new(kind, &ds).unwrap();
        let w = vec![0.0; obj.dim()];
        let fd = finite_diff_grad(&obj, &w, 1e-5);
        assert!(rel_err(&fd, &obj.grad_full(&w)) <= 1e-5);
    }
}

#[test]
fn coarse_step_is_caught_by_the_tolerance() {
    let ds = dataset(LossKind::Nlls);
    let obj = Objective::new(LossKind::Nlls, &ds).unwrap();
    let w = vec![0.7; obj.dim()];
    let fd = finite_diff_grad(&obj, &w, 1.0);
    assert!(rel_err(&fd, &obj.grad_full(&w)) > 1e-5);
}
