//! Quick invariant checks behind the `selftest` subcommand.

use anastaars_core::geometry::{extend_basis, sample_haar_basis};
use anastaars_core::interp::{
    build_diagonal_model, build_linear_model, evaluate_model, extend_interpolation_set, extend_linear_model, fit_mfn,
    generate_poised_set, mfn_kkt_residual,
};
use anastaars_core::optimizer::check_dimension_trace;
use anastaars_core::qaoa::{brute_force_maxcut, exact_expectation};
use anastaars_core::*;
use nalgebra::DVector;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn haar_orthonormality() -> Result<Check> {
    let mut rng = seeded_rng(1);
    let mut worst: f64 = 0.0;
    for d in [5, 10, 50] {
        for q in [1, 2, 5] {
            for _ in 0..20 {
                let b = sample_haar_basis(d, q, &mut rng)?;
                worst = worst.max(b.orthonormality_defect());
                if q < d {
                    worst = worst.max(extend_basis(&b, &mut rng)?.orthonormality_defect());
                }
            }
        }
    }
    Ok(check(
        "haar-orthonormality",
        worst <= 1e-10,
        format!("max |U^T U - I| = {worst:.2e}"),
    ))
}

fn linear_extension() -> Result<Check> {
    let mut rng = seeded_rng(2);
    let mut worst: f64 = 0.0;
    for q in 1..10 {
        let points = generate_poised_set(q, 0.5, ModelKind::Linear);
        let values: Vec<f64> = points.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let set = InterpolationSet::new(ModelKind::Linear, points, values, 0.5)?;
        let model = build_linear_model(&set)?;
        let new_value = rng.random_range(-1.0..1.0);
        let closed = extend_linear_model(&model, 0.25, new_value - set.values[0])?;
        let rebuilt = build_linear_model(&extend_interpolation_set(&set, 0.25, &[new_value])?)?;
        worst = worst.max((closed.g - rebuilt.g).amax());
    }
    Ok(check(
        "linear-extension",
        worst <= 1e-12,
        format!("closed form vs rebuild {worst:.2e}"),
    ))
}

fn model_exactness() -> Result<Check> {
    let mut rng = seeded_rng(3);
    let mut diag_err: f64 = 0.0;
    let mut kkt: f64 = 0.0;
    for q in 1..6 {
        let b = DVector::from_fn(q, |_, _| rng.random_range(-1.0..1.0));
        let h = DVector::from_fn(q, |_, _| rng.random_range(-2.0..2.0));
        let f = |s: &DVector<f64>| 0.3 + b.dot(s) + 0.5 * s.component_mul(s).dot(&h);
        let points = generate_poised_set(q, 0.7, ModelKind::Diagonal);
        let values = points.iter().map(&f).collect();
        let model = build_diagonal_model(&InterpolationSet::new(ModelKind::Diagonal, points, values, 0.7)?)?;
        for _ in 0..20 {
            let s = DVector::from_fn(q, |_, _| rng.random_range(-0.4..0.4));
            diag_err = diag_err.max((evaluate_model(&model, &s)? - f(&s)).abs());
        }
        let points = generate_poised_set(q, 0.7, ModelKind::Mfn);
        let values = points.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let set = InterpolationSet::new(ModelKind::Mfn, points, values, 0.7)?;
        kkt = kkt.max(mfn_kkt_residual(&set, &fit_mfn(&set)?));
    }
    Ok(check(
        "model-exactness",
        diag_err <= 1e-10 && kkt <= 1e-8,
        format!("diagonal error {diag_err:.2e}, mfn kkt residual {kkt:.2e}"),
    ))
}

fn maxcut_and_qaoa() -> Result<Check> {
    let ring = cycle_graph(6)?;
    let chv = chvatal_graph();
    let (m6, _) = brute_force_maxcut(&ring)?;
    let (m_chv, _) = brute_force_maxcut(&chv)?;
    let z6 = exact_expectation(&ring, &QaoaAngles::zeros(3))?;
    let z_chv = exact_expectation(&chv, &QaoaAngles::zeros(3))?;
    let passed = m6 == 6.0 && m_chv == 20.0 && (z6 - 3.0).abs() <= 1e-12 && (z_chv - 12.0).abs() <= 1e-12;
    Ok(check(
        "maxcut-and-zero-angle",
        passed,
        format!("maxcut {m6}/{m_chv}, zero-angle expectation {z6}/{z_chv}"),
    ))
}

fn shot_consistency() -> Result<Check> {
    let oracle = qaoa_oracle(chvatal_graph(), 2)?;
    let x = [0.3, -0.2, 0.5, 0.1];
    let e = estimate_at(&oracle, &x, 200_000, &mut seeded_rng(4))?;
    let truth = oracle.true_value(&x).unwrap_or(f64::NAN);
    let se = e.std / (e.shots as f64).sqrt();
    Ok(check(
        "shot-consistency",
        (e.mean - truth).abs() <= 5.0 * se,
        format!("mean {:.5} vs exact {truth:.5} (se {se:.1e})", e.mean),
    ))
}

fn optimizer_trace() -> Result<Check> {
    let oracle = qaoa_oracle(cycle_graph(6)?, 5)?;
    let cfg = OptimizerConfig {
        shots_per_estimate: 50,
        max_evaluations: 20_000,
        ..OptimizerConfig::qaoa_defaults(10)
    };
    let x0 = DVector::from_element(10, 0.25);
    let a = run_anastaars(&cfg, &oracle, x0.clone(), &mut seeded_rng(5))?;
    let b = run_anastaars(&cfg, &oracle, x0, &mut seeded_rng(5))?;
    let legal = check_dimension_trace(&cfg, &a.records).is_ok();
    Ok(check(
        "optimizer-trace",
        legal && a == b && a.shots_used <= cfg.max_evaluations,
        format!(
            "{} iterations, trace legal: {legal}, deterministic: {}",
            a.records.len(),
            a == b
        ),
    ))
}

/// Runs every check; an internal error counts as a failed check.
pub fn run_selftest() -> Vec<Check> {
    type CheckFn = fn() -> Result<Check>;
    let checks: [(&'static str, CheckFn); 6] = [
        ("haar-orthonormality", haar_orthonormality),
        ("linear-extension", linear_extension),
        ("model-exactness", model_exactness),
        ("maxcut-and-zero-angle", maxcut_and_qaoa),
        ("shot-consistency", shot_consistency),
        ("optimizer-trace", optimizer_trace),
    ];
    checks
        .into_iter()
        .map(|(name, f)| f().unwrap_or_else(|e| check(name, false, format!("error: {e}"))))
        .collect()
}
