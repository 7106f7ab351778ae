//! Dense trust-region subproblem `min m(s)` subject to `||s|| <= δ`.
//!
//! The exact solution is found from the eigendecomposition `H = V Λ Vᵀ` by
//! root-finding on the secular equation `||s(λ)|| = δ`, with
//! `s(λ) = −(H + λI)⁻¹ g`, and the hard case handled by adding a multiple of
//! the leftmost eigenvector. If the result does not meet the fraction of
//! Cauchy decrease (it always should, up to round-off) the Cauchy point is
//! returned instead.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::interp::QuadraticSubspaceModel;

/// Lower bound on `||H||` in the Cauchy decrease bound.
pub const HESSIAN_NORM_FLOOR: f64 = 1e-12;

const SECULAR_MAX_ITER: usize = 200;

/// `½||g|| min(δ, ||g|| / max(||H||, ε_H))`.
pub fn cauchy_decrease_bound(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> f64 {
    let gnorm = g.norm();
    let hnorm = spectral_norm(h).max(HESSIAN_NORM_FLOOR);
    0.5 * gnorm * delta.min(gnorm / hnorm)
}

fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let sym = (h + h.transpose()) * 0.5;
    sym.symmetric_eigenvalues().amax()
}

/// `m(0) − m(s)` for the quadratic part of `model`.
pub fn model_reduction(model: &QuadraticSubspaceModel, s: &DVector<f64>) -> f64 {
    -(model.g.dot(s) + 0.5 * s.dot(&(&model.h * s)))
}

/// Minimizer of the model along `−g` inside the ball.
pub fn cauchy_point(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> DVector<f64> {
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return DVector::zeros(g.len());
    }
    let curvature = g.dot(&(h * g));
    let boundary = delta / gnorm;
    let t = if curvature <= 0.0 {
        boundary
    } else {
        (gnorm * gnorm / curvature).min(boundary)
    };
    g * (-t)
}

fn rescale_to(s: DVector<f64>, delta: f64) -> DVector<f64> {
    let n = s.norm();
    if n > delta {
        s * (delta / n)
    } else {
        s
    }
}

/// Step with `||s|| <= δ` achieving at least the Cauchy decrease; zero when `g = 0`.
pub fn solve_tr_subproblem(model: &QuadraticSubspaceModel, delta: f64) -> DVector<f64> {
    let q = model.dim();
    let g = &model.g;
    if g.norm() == 0.0 || q == 0 || !(delta > 0.0) {
        return DVector::zeros(q);
    }
    let h = (&model.h + model.h.transpose()) * 0.5;
    let bound = cauchy_decrease_bound(g, &h, delta);
    let exact = rescale_to(exact_step(g, &h, delta), delta);
    let cauchy = cauchy_point(g, &h, delta);
    let red_exact = model_reduction(model, &exact);
    let red_cauchy = model_reduction(model, &cauchy);
    if exact.iter().all(|v| v.is_finite()) && red_exact >= bound && red_exact >= red_cauchy {
        exact
    } else {
        cauchy
    }
}

fn exact_step(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> DVector<f64> {
    let q = g.len();
    let eig = SymmetricEigen::new(h.clone());
    let lambdas = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let gt = v.transpose() * g;
    let scale = lambdas.amax().max(g.norm() / delta).max(1.0);
    let tiny = 1e-14 * scale;

    let (i_min, lambda_min) = lambdas
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, l)| if l < acc.1 { (i, l) } else { acc });

    let step_norm = |shift: f64| -> f64 {
        gt.iter()
            .zip(lambdas.iter())
            .map(|(&c, &l)| {
                let den = l + shift;
                if c == 0.0 {
                    0.0
                } else {
                    (c / den).powi(2)
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let step_at = |shift: f64| -> DVector<f64> {
        let coeffs = DVector::from_fn(q, |i, _| {
            let den = lambdas[i] + shift;
            if gt[i] == 0.0 {
                0.0
            } else {
                -gt[i] / den
            }
        });
        v * coeffs
    };

    // interior Newton step
    if lambda_min > tiny {
        let s = step_at(0.0);
        if s.norm() <= delta {
            return s;
        }
    }

    let lower = (-lambda_min).max(0.0);
    // hard case: g has no weight on the leftmost eigenspace
    let degenerate: Vec<usize> = (0..q).filter(|&i| (lambdas[i] - lambda_min).abs() <= tiny).collect();
    let weight_on_min: f64 = degenerate.iter().map(|&i| gt[i] * gt[i]).sum::<f64>().sqrt();
    if weight_on_min <= 1e-12 * g.norm() {
        let coeffs = DVector::from_fn(q, |i, _| {
            if degenerate.contains(&i) {
                0.0
            } else {
                -gt[i] / (lambdas[i] + lower)
            }
        });
        let base = v * coeffs;
        let base_norm = base.norm();
        if base_norm <= delta {
            let tau = (delta * delta - base_norm * base_norm).max(0.0).sqrt();
            return base + v.column(i_min) * tau;
        }
    }

    // bracket the root of ||s(λ)|| = δ on (lower, ∞)
    let mut lo = lower;
    let mut hi = lower + g.norm() / delta + lambdas.amax() + 1.0;
    while step_norm(hi) > delta {
        hi *= 2.0;
    }
    let mut shift = hi;
    for _ in 0..SECULAR_MAX_ITER {
        // Newton on 1/||s|| − 1/δ, falling back to bisection outside the bracket
        let norm = step_norm(shift);
        if (norm - delta).abs() <= 1e-12 * delta {
            break;
        }
        if norm > delta {
            lo = shift;
        } else {
            hi = shift;
        }
        let dnorm: f64 = gt
            .iter()
            .zip(lambdas.iter())
            .map(|(&c, &l)| -(c * c) / (l + shift).powi(3))
            .sum::<f64>()
            / norm;
        let phi = 1.0 / norm - 1.0 / delta;
        let dphi = -dnorm / (norm * norm);
        let mut next = shift - phi / dphi;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        shift = next;
    }
    step_at(shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::ModelKind;
    use nalgebra::dvector;

    fn model(g: DVector<f64>, h: DMatrix<f64>) -> QuadraticSubspaceModel {
        QuadraticSubspaceModel {
            kind: ModelKind::Mfn,
            f0: 0.0,
            g,
            h,
        }
    }

    #[test]
    fn linear_model_steps_to_boundary() {
        let m = model(dvector![1.0, 0.0], DMatrix::zeros(2, 2));
        let s = solve_tr_subproblem(&m, 2.0);
        assert!((s - dvector![-2.0, 0.0]).amax() < 1e-12);
    }

    #[test]
    fn interior_newton_step() {
        let m = model(dvector![2.0], DMatrix::from_element(1, 1, 4.0));
        let s = solve_tr_subproblem(&m, 10.0);
        assert!((s[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        let m = model(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![-1.0, 2.0]));
        assert_eq!(solve_tr_subproblem(&m, 1.0), DVector::zeros(2));
    }

    #[test]
    fn negative_curvature_matches_boundary_grid_search() {
        let m = model(dvector![1.0, 1.0], DMatrix::from_diagonal(&dvector![-2.0, -2.0]));
        let s = solve_tr_subproblem(&m, 1.0);
        assert!(s.norm() <= 1.0 + 1e-12);
        let red = model_reduction(&m, &s);
        assert!(red >= cauchy_decrease_bound(&m.g, &m.h, 1.0));
        // oracle: brute force over the boundary circle
        let best = (0..10_000)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 10_000.0;
                model_reduction(&m, &dvector![t.cos(), t.sin()])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(red >= best - 1e-6);
    }

    #[test]
    fn hard_case_uses_leftmost_eigenvector() {
        // g orthogonal to the negative-curvature direction
        let m = model(dvector![1.0, 0.0], DMatrix::from_diagonal(&dvector![1.0, -1.0]));
        let s = solve_tr_subproblem(&m, 2.0);
        assert!((s.norm() - 2.0).abs() < 1e-9);
        let best = (0..20_000)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 20_000.0;
                model_reduction(&m, &dvector![2.0 * t.cos(), 2.0 * t.sin()])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(model_reduction(&m, &s) >= best - 1e-6);
    }

    #[test]
    fn cauchy_point_bounds() {
        let g = dvector![3.0, -4.0];
        let h = DMatrix::from_diagonal(&dvector![1.0, 1.0]);
        let c = cauchy_point(&g, &h, 10.0);
        assert!((c - dvector![-3.0, 4.0]).amax() < 1e-12);
        let c = cauchy_point(&g, &h, 1.0);
        assert!((c.norm() - 1.0).abs() < 1e-12);
    }
}
