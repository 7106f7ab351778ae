//! Interpolation models on subspace point sets.
//!
//! Three model families are supported: linear models on `q + 1` points,
//! minimum-Frobenius-norm (MFN) quadratic models on an underdetermined set,
//! and quadratic models with a diagonal Hessian on the `2q + 1` point star
//! `{0, ±h_i e_i}`. Sets can be grown by one dimension after an unsuccessful
//! iteration: every existing point `s` becomes `(q_hat * s, 0)` with
//! `q_hat = sqrt(1 + 1/q)`, which keeps its image `x + Q s` unchanged in the
//! ambient space, so its function estimate is reused as-is.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sets whose (equilibrated) interpolation matrix has a larger condition
/// estimate are rejected as not poised.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Linear,
    Mfn,
    Diagonal,
}

impl ModelKind {
    /// Number of fresh points needed after one dimension extension.
    pub fn points_per_extension(self) -> usize {
        match self {
            ModelKind::Linear | ModelKind::Mfn => 1,
            ModelKind::Diagonal => 2,
        }
    }

    /// Size of a freshly generated set in dimension `q`.
    pub fn fresh_set_size(self, q: usize) -> usize {
        match self {
            ModelKind::Linear => q + 1,
            ModelKind::Mfn | ModelKind::Diagonal => 2 * q + 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Mfn => "mfn",
            ModelKind::Diagonal => "diagonal",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "mfn" => Ok(ModelKind::Mfn),
            "diagonal" | "diag" => Ok(ModelKind::Diagonal),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// `sqrt(1 + 1/q)`, the factor applied to reused points when the subspace grows
/// from `q` to `q + 1` dimensions.
pub fn q_hat(q: usize) -> f64 {
    (1.0 + 1.0 / q as f64).sqrt()
}

/// Points of a subspace model together with their (shot-averaged) values.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSet {
    pub kind: ModelKind,
    pub points: Vec<DVector<f64>>,
    pub values: Vec<f64>,
    /// Trust-region radius in force when the newest points were placed.
    pub radius: f64,
    /// Product of all `q_hat` factors applied since the set was generated.
    pub cumulative_scaling: f64,
}

impl InterpolationSet {
    pub fn new(kind: ModelKind, points: Vec<DVector<f64>>, values: Vec<f64>, radius: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Layout("empty interpolation set".into()));
        }
        if points.len() != values.len() {
            return Err(Error::Layout(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let q = points[0].len();
        if q == 0 || points.iter().any(|p| p.len() != q) {
            return Err(Error::Layout("points must share a positive dimension".into()));
        }
        if points[0].iter().any(|&c| c != 0.0) {
            return Err(Error::Layout("first point must be the origin".into()));
        }
        Ok(Self {
            kind,
            points,
            values,
            radius,
            cumulative_scaling: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn center_value(&self) -> f64 {
        self.values[0]
    }
}

/// `m(s) = f0 + g^T s + 1/2 s^T H s` on a `q`-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSubspaceModel {
    pub kind: ModelKind,
    pub f0: f64,
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
}

impl QuadraticSubspaceModel {
    pub fn linear(f0: f64, g: DVector<f64>) -> Self {
        let q = g.len();
        Self {
            kind: ModelKind::Linear,
            f0,
            g,
            h: DMatrix::zeros(q, q),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn evaluate(&self, s: &DVector<f64>) -> Result<f64> {
        evaluate_model(self, s)
    }
}

pub fn evaluate_model(model: &QuadraticSubspaceModel, s: &DVector<f64>) -> Result<f64> {
    if s.len() != model.dim() {
        return Err(Error::Dimension(format!(
            "model is {}-dimensional, point has length {}",
            model.dim(),
            s.len()
        )));
    }
    Ok(model.f0 + model.g.dot(s) + 0.5 * s.dot(&(&model.h * s)))
}

/// Fresh poised layout: `{0, δe_1, …, δe_q}` for linear models and
/// `{0, δe_1, …, δe_q, −δe_1, …, −δe_q}` otherwise.
pub fn generate_poised_set(q: usize, delta: f64, kind: ModelKind) -> Vec<DVector<f64>> {
    let mut points = Vec::with_capacity(kind.fresh_set_size(q));
    points.push(DVector::zeros(q));
    for i in 0..q {
        let mut p = DVector::zeros(q);
        p[i] = delta;
        points.push(p);
    }
    if kind != ModelKind::Linear {
        for i in 0..q {
            let mut p = DVector::zeros(q);
            p[i] = -delta;
            points.push(p);
        }
    }
    points
}

/// Condition estimate of `a` after scaling every row and column to unit max-norm.
fn equilibrated_condition(a: &DMatrix<f64>) -> f64 {
    let mut scaled = a.clone();
    for mut row in scaled.row_iter_mut() {
        let m = row.amax();
        if m > 0.0 {
            row /= m;
        }
    }
    for mut col in scaled.column_iter_mut() {
        let m = col.amax();
        if m > 0.0 {
            col /= m;
        }
    }
    let sv = scaled.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve_poised(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let condition = equilibrated_condition(&a);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NotPoised { condition });
    }
    a.lu().solve(b).ok_or(Error::NotPoised {
        condition: f64::INFINITY,
    })
}

/// Fits `m(s) = a0 + a^T s` through `q + 1` points by solving `L^T a = δf`.
pub fn build_linear_model(set: &InterpolationSet) -> Result<QuadraticSubspaceModel> {
    let q = set.dim();
    if set.len() != q + 1 {
        return Err(Error::Layout(format!(
            "linear model needs {} points, set has {}",
            q + 1,
            set.len()
        )));
    }
    // rows of L^T are the displacement vectors s^i - s^0
    let lt = DMatrix::from_fn(q, q, |i, j| set.points[i + 1][j]);
    let f0 = set.center_value();
    let rhs = DVector::from_fn(q, |i, _| set.values[i + 1] - f0);
    let g = solve_poised(lt, &rhs)?;
    Ok(QuadraticSubspaceModel::linear(f0, g))
}

/// Closed-form `(q+1)`-dimensional linear model after a basis extension: the
/// old gradient is divided by `q_hat` and the new coordinate is `δf / ζ`.
pub fn extend_linear_model(prev: &QuadraticSubspaceModel, zeta: f64, delta_f: f64) -> Result<QuadraticSubspaceModel> {
    if zeta == 0.0 || !zeta.is_finite() {
        return Err(Error::RadiusViolation { zeta, radius: f64::NAN });
    }
    let q = prev.dim();
    let scale = q_hat(q);
    let mut g = DVector::zeros(q + 1);
    for i in 0..q {
        g[i] = prev.g[i] / scale;
    }
    g[q] = delta_f / zeta;
    Ok(QuadraticSubspaceModel::linear(prev.f0, g))
}

/// Number of quadratic monomials in dimension `q`.
pub fn quadratic_basis_len(q: usize) -> usize {
    q * (q + 1) / 2
}

/// Quadratic half of the natural basis: `(½s_1², s_1s_2, …, s_1s_q, ½s_2², …, ½s_q²)`.
pub fn quadratic_features(s: &DVector<f64>) -> DVector<f64> {
    let q = s.len();
    let mut out = DVector::zeros(quadratic_basis_len(q));
    let mut k = 0;
    for i in 0..q {
        for j in i..q {
            out[k] = if i == j { 0.5 * s[i] * s[i] } else { s[i] * s[j] };
            k += 1;
        }
    }
    out
}

/// Inverse of [`quadratic_features`]: builds the symmetric Hessian from the
/// quadratic coefficients.
pub fn hessian_from_quadratic_coefficients(q: usize, alpha_q: &DVector<f64>) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(q, q);
    let mut k = 0;
    for i in 0..q {
        for j in i..q {
            h[(i, j)] = alpha_q[k];
            h[(j, i)] = alpha_q[k];
            k += 1;
        }
    }
    h
}

/// Full MFN fit: coefficients in the natural basis and the KKT multipliers.
#[derive(Debug, Clone)]
pub struct MfnFit {
    pub model: QuadraticSubspaceModel,
    pub alpha_l: DVector<f64>,
    pub alpha_q: DVector<f64>,
    pub multipliers: DVector<f64>,
}

/// Linear and quadratic blocks of the interpolation matrix in the natural basis.
pub fn mfn_blocks(set: &InterpolationSet) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = set.dim();
    let m = set.len();
    let nq = quadratic_basis_len(q);
    let mut ml = DMatrix::zeros(m, q + 1);
    let mut mq = DMatrix::zeros(m, nq);
    for (r, p) in set.points.iter().enumerate() {
        ml[(r, 0)] = 1.0;
        for j in 0..q {
            ml[(r, j + 1)] = p[j];
        }
        mq.row_mut(r).copy_from(&quadratic_features(p).transpose());
    }
    (ml, mq)
}

/// Solves `min ½‖α_Q‖²` subject to `M_L α_L + M_Q α_Q = f`.
///
/// With `α_Q = M_Qᵀ λ` the optimality conditions reduce to the saddle system
/// `[[M_Q M_Qᵀ, M_L], [M_Lᵀ, 0]] (λ, α_L) = (f, 0)`.
pub fn fit_mfn(set: &InterpolationSet) -> Result<MfnFit> {
    if set.kind != ModelKind::Mfn {
        return Err(Error::Layout(format!("expected an mfn set, got {}", set.kind)));
    }
    let q = set.dim();
    let m = set.len();
    if m < q + 1 || m > (q + 1) * (q + 2) / 2 {
        return Err(Error::Layout(format!(
            "mfn model in dimension {q} needs between {} and {} points, set has {m}",
            q + 1,
            (q + 1) * (q + 2) / 2
        )));
    }
    // work in coordinates scaled to the unit ball; a uniform scaling keeps the
    // minimizer since every quadratic coefficient scales by the same factor
    let rho = set.points.iter().map(|p| p.amax()).fold(0.0_f64, f64::max);
    if rho == 0.0 {
        return Err(Error::NotPoised {
            condition: f64::INFINITY,
        });
    }
    let scaled = InterpolationSet {
        points: set.points.iter().map(|p| p / rho).collect(),
        ..set.clone()
    };
    let (ml, mq) = mfn_blocks(&scaled);
    let n = m + q + 1;
    let mut kkt = DMatrix::zeros(n, n);
    kkt.view_mut((0, 0), (m, m)).copy_from(&(&mq * mq.transpose()));
    kkt.view_mut((0, m), (m, q + 1)).copy_from(&ml);
    kkt.view_mut((m, 0), (q + 1, m)).copy_from(&ml.transpose());
    let mut rhs = DVector::zeros(n);
    rhs.rows_mut(0, m).copy_from(&DVector::from_column_slice(&set.values));
    let sol = solve_poised(kkt, &rhs)?;

    let lambda_scaled = sol.rows(0, m).into_owned();
    let alpha_l_scaled = sol.rows(m, q + 1).into_owned();
    let alpha_q_scaled = mq.transpose() * &lambda_scaled;

    let mut alpha_l = alpha_l_scaled;
    for j in 1..=q {
        alpha_l[j] /= rho;
    }
    let alpha_q = alpha_q_scaled / (rho * rho);
    // α_Q = M_Qᵀλ in original coordinates picks up a factor rho⁴ on λ
    let multipliers = lambda_scaled / rho.powi(4);

    let g = alpha_l.rows(1, q).into_owned();
    let h = hessian_from_quadratic_coefficients(q, &alpha_q);
    Ok(MfnFit {
        model: QuadraticSubspaceModel {
            kind: ModelKind::Mfn,
            f0: alpha_l[0],
            g,
            h,
        },
        alpha_l,
        alpha_q,
        multipliers,
    })
}

/// Largest absolute entry over the three KKT blocks of an MFN fit: primal
/// feasibility, `α_Q − M_Qᵀλ`, and `M_Lᵀλ`.
pub fn mfn_kkt_residual(set: &InterpolationSet, fit: &MfnFit) -> f64 {
    let (ml, mq) = mfn_blocks(set);
    let f = DVector::from_column_slice(&set.values);
    let primal = (&ml * &fit.alpha_l + &mq * &fit.alpha_q - f).amax();
    let stationarity = (&fit.alpha_q - mq.transpose() * &fit.multipliers).amax();
    let dual = (ml.transpose() * &fit.multipliers).amax();
    primal.max(stationarity).max(dual)
}

pub fn build_mfn_model(set: &InterpolationSet) -> Result<QuadraticSubspaceModel> {
    fit_mfn(set).map(|fit| fit.model)
}

/// Per-axis half-widths of a `{0, +h_i e_i, −h_i e_i}` layout.
fn diagonal_half_widths(set: &InterpolationSet) -> Result<Vec<f64>> {
    let q = set.dim();
    if set.len() != 2 * q + 1 {
        return Err(Error::Layout(format!(
            "diagonal model needs {} points, set has {}",
            2 * q + 1,
            set.len()
        )));
    }
    let mut widths = Vec::with_capacity(q);
    for i in 0..q {
        let plus = &set.points[1 + i];
        let minus = &set.points[1 + q + i];
        let on_axis = |p: &DVector<f64>| (0..q).all(|j| j == i || p[j] == 0.0);
        let h = plus[i];
        if !(h > 0.0) || !on_axis(plus) || !on_axis(minus) || minus[i] != -h {
            return Err(Error::Layout(format!(
                "points {} and {} are not a symmetric pair on axis {i}",
                1 + i,
                1 + q + i
            )));
        }
        widths.push(h);
    }
    Ok(widths)
}

/// Central-difference model with diagonal Hessian; this is the closed-form
/// solution of the `(2q+1) x (2q+1)` interpolation system on the star layout.
pub fn build_diagonal_model(set: &InterpolationSet) -> Result<QuadraticSubspaceModel> {
    if set.kind != ModelKind::Diagonal {
        return Err(Error::Layout(format!("expected a diagonal set, got {}", set.kind)));
    }
    let widths = diagonal_half_widths(set)?;
    let q = widths.len();
    let v0 = set.center_value();
    let mut g = DVector::zeros(q);
    let mut h = DMatrix::zeros(q, q);
    for (i, &w) in widths.iter().enumerate() {
        let vp = set.values[1 + i];
        let vm = set.values[1 + q + i];
        g[i] = (vp - vm) / (2.0 * w);
        h[(i, i)] = (vp + vm - 2.0 * v0) / (w * w);
    }
    Ok(QuadraticSubspaceModel {
        kind: ModelKind::Diagonal,
        f0: v0,
        g,
        h,
    })
}

/// Dispatches on `set.kind`.
pub fn build_model(set: &InterpolationSet) -> Result<QuadraticSubspaceModel> {
    match set.kind {
        ModelKind::Linear => build_linear_model(set),
        ModelKind::Mfn => build_mfn_model(set),
        ModelKind::Diagonal => build_diagonal_model(set),
    }
}

/// New subspace points required to grow `prev` by one dimension.
///
/// Linear and MFN sets gain `(0, …, 0, ζ)`; diagonal sets gain the pair
/// `±q_hat·ζ e_{q+1}` where `ζ` plays the role of the radius the set was used at.
pub fn extension_points(prev: &InterpolationSet, zeta: f64) -> Result<Vec<DVector<f64>>> {
    if !(zeta != 0.0 && zeta.abs() <= prev.radius) {
        return Err(Error::RadiusViolation {
            zeta,
            radius: prev.radius,
        });
    }
    let q = prev.dim();
    let axis = |v: f64| {
        let mut p = DVector::zeros(q + 1);
        p[q] = v;
        p
    };
    Ok(match prev.kind {
        ModelKind::Linear | ModelKind::Mfn => vec![axis(zeta)],
        ModelKind::Diagonal => {
            let w = q_hat(q) * zeta.abs();
            vec![axis(w), axis(-w)]
        }
    })
}

/// Grows `prev` into dimension `q + 1`, reusing every old value and appending
/// the new point(s) from [`extension_points`] with `new_values`.
pub fn extend_interpolation_set(prev: &InterpolationSet, zeta: f64, new_values: &[f64]) -> Result<InterpolationSet> {
    let fresh = extension_points(prev, zeta)?;
    if fresh.len() != new_values.len() {
        return Err(Error::Layout(format!(
            "extension needs {} new values, got {}",
            fresh.len(),
            new_values.len()
        )));
    }
    let q = prev.dim();
    let scale = q_hat(q);
    let lift = |p: &DVector<f64>| {
        let mut out = DVector::zeros(q + 1);
        for j in 0..q {
            out[j] = scale * p[j];
        }
        out
    };
    let mut points: Vec<DVector<f64>> = prev.points.iter().map(lift).collect();
    let mut values = prev.values.clone();
    match prev.kind {
        ModelKind::Linear | ModelKind::Mfn => {
            points.push(fresh[0].clone());
            values.push(new_values[0]);
        }
        ModelKind::Diagonal => {
            // keep the {0, +e_1..+e_{q+1}, -e_1..-e_{q+1}} ordering
            points.insert(q + 1, fresh[0].clone());
            values.insert(q + 1, new_values[0]);
            points.push(fresh[1].clone());
            values.push(new_values[1]);
        }
    }
    Ok(InterpolationSet {
        kind: prev.kind,
        points,
        values,
        radius: zeta.abs(),
        cumulative_scaling: prev.cumulative_scaling * scale,
    })
}
