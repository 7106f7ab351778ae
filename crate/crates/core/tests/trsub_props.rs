use anastaars_core::interp::QuadraticSubspaceModel;
use anastaars_core::seeded_rng;
use anastaars_core::trsub::{cauchy_decrease_bound, model_reduction, solve_tr_subproblem};
use anastaars_core::ModelKind;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn random_model(seed: u64, q: usize, scale: f64) -> QuadraticSubspaceModel {
    let mut rng = seeded_rng(seed);
    let g = DVector::from_fn(q, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
    let a = DMatrix::from_fn(q, q, |_, _| rng.sample::<f64, _>(StandardNormal));
    QuadraticSubspaceModel {
        kind: ModelKind::Mfn,
        f0: 0.0,
        g,
        h: (&a + a.transpose()) * 0.5,
    }
}

/// Best reduction found by sampling the ball: random directions at random
/// radii plus the boundary.
fn sampled_best(model: &QuadraticSubspaceModel, delta: f64, seed: u64) -> f64 {
    let q = model.g.len();
    let mut rng = seeded_rng(seed);
    let mut best = 0.0f64;
    for _ in 0..20_000 {
        let dir = DVector::from_fn(q, |_, _| rng.sample::<f64, _>(StandardNormal)).normalize();
        for t in [rng.random::<f64>(), 1.0] {
            best = best.max(model_reduction(model, &(&dir * (t * delta))));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn step_is_feasible_and_beats_cauchy(seed in any::<u64>(), q in 1usize..12, delta in 1e-4f64..10.0, scale in 1e-3f64..1e3) {
        let model = random_model(seed, q, scale);
        let s = solve_tr_subproblem(&model, delta);
        prop_assert!(s.norm() <= delta * (1.0 + 1e-12));
        let red = model_reduction(&model, &s);
        let bound = cauchy_decrease_bound(&model.g, &model.h, delta);
        prop_assert!(red >= bound * (1.0 - 1e-10));
    }
}

#[test]
fn step_is_near_globally_optimal_in_low_dimension() {
    for seed in 0..40 {
        let q = 1 + (seed as usize % 3);
        let model = random_model(seed, q, 1.0);
        let delta = 0.5 + (seed % 5) as f64;
        let red = model_reduction(&model, &solve_tr_subproblem(&model, delta));
        let sampled = sampled_best(&model, delta, seed + 1000);
        assert!(
            red >= sampled - 1e-8 * sampled.abs().max(1.0),
            "seed {seed}: {red} < {sampled}"
        );
    }
}

#[test]
fn zero_gradient_gives_zero_step() {
    let model = QuadraticSubspaceModel {
        kind: ModelKind::Diagonal,
        f0: 1.0,
        g: DVector::zeros(3),
        h: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 0.5])),
    };
    assert_eq!(solve_tr_subproblem(&model, 1.0), DVector::zeros(3));
}
