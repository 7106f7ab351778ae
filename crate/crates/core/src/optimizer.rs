//! Adaptive random-subspace stochastic trust-region loop.
//!
//! Each iteration works on an affine subspace `x_k + Q_k s`. After a success
//! (or when the dimension cap would be exceeded) a fresh `q0`-dimensional Haar
//! subspace and a fresh interpolation set are drawn. After a failure the
//! previous subspace is grown by one random orthogonal direction and the old
//! interpolation values are reused, so only the point(s) on the new axis need
//! shots. Acceptance uses the noise-inflated ratio
//! `(f0 − fs + r ε) / (m(0) − m(s))` together with `||g|| >= η2 δ`.
//!
//! The fixed-dimension baseline ([`run_stars`]) always redraws the subspace
//! and the set and uses the classical ratio.

use nalgebra::DVector;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::geometry::{extend_basis, sample_haar_basis, SubspaceBasis};
use crate::interp::{
    build_model, extend_interpolation_set, extend_linear_model, extension_points, generate_poised_set,
    InterpolationSet, ModelKind, QuadraticSubspaceModel,
};
use crate::oracle::{estimate_at, Estimate, StochasticObjective};
use crate::trsub::{cauchy_decrease_bound, model_reduction, solve_tr_subproblem};

/// Model reductions at or below this are treated as no predicted decrease.
pub const MIN_MODEL_REDUCTION: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Adaptive dimension, point reuse, noise-aware ratio.
    Anastaars,
    /// Fixed dimension, fresh subspace every iteration.
    Stars,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Anastaars => "anastaars",
            Algorithm::Stars => "stars",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anastaars" => Ok(Algorithm::Anastaars),
            "stars" => Ok(Algorithm::Stars),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Radius expansion/contraction factor, `> 1`.
    pub gamma: f64,
    /// Acceptance threshold on the ratio, in `(0, 1)`.
    pub eta1: f64,
    /// Required `||g|| / δ` for a successful iteration.
    pub eta2: f64,
    pub delta0: f64,
    pub delta_max: f64,
    /// Weight of the noise estimate in the ratio numerator.
    pub r: f64,
    pub q0: usize,
    pub q_max: usize,
    pub model_kind: ModelKind,
    /// Shots averaged into each function estimate.
    pub shots_per_estimate: usize,
    /// Total shot budget for a run.
    pub max_evaluations: u64,
    pub seed: u64,
    /// Estimate accuracy constant. Kept for the record; the fixed shot count
    /// per estimate is what controls accuracy here.
    pub epsilon_f: f64,
    /// Keep `r` in the baseline's ratio instead of forcing it to zero.
    pub stars_noise_term: bool,
}

impl OptimizerConfig {
    /// Parameters of the QAOA experiments: `r = 1, γ = 2, η1 = 0.01, η2 = 0.9,
    /// δ_max = 5, δ0 = 1`, MFN models with `q0 = 2` and `q_max = d`.
    pub fn qaoa_defaults(d: usize) -> Self {
        Self {
            gamma: 2.0,
            eta1: 0.01,
            eta2: 0.9,
            delta0: 1.0,
            delta_max: 5.0,
            r: 1.0,
            q0: 2.min(d),
            q_max: d,
            model_kind: ModelKind::Mfn,
            shots_per_estimate: 1000,
            max_evaluations: 550_000,
            seed: 0,
            epsilon_f: 0.1,
            stars_noise_term: false,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.gamma > 1.0) {
            return fail(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.eta1 > 0.0 && self.eta1 < 1.0) {
            return fail(format!("eta1 must lie in (0, 1), got {}", self.eta1));
        }
        if !(self.eta2 > 0.0) {
            return fail(format!("eta2 must be positive, got {}", self.eta2));
        }
        if !(self.delta0 > 0.0 && self.delta0 < self.delta_max) {
            return fail(format!(
                "need 0 < delta0 < delta_max, got delta0 = {}, delta_max = {}",
                self.delta0, self.delta_max
            ));
        }
        if !(self.r >= 0.0) {
            return fail(format!("r must be nonnegative, got {}", self.r));
        }
        if !(1 <= self.q0 && self.q0 <= self.q_max && self.q_max <= d) {
            return fail(format!(
                "need 1 <= q0 <= q_max <= d, got q0 = {}, q_max = {}, d = {d}",
                self.q0, self.q_max
            ));
        }
        if self.shots_per_estimate == 0 {
            return fail("shots_per_estimate must be at least 1".into());
        }
        Ok(())
    }

    fn ratio_weight(&self, algorithm: Algorithm) -> f64 {
        match algorithm {
            Algorithm::Anastaars => self.r,
            Algorithm::Stars if self.stars_noise_term => self.r,
            Algorithm::Stars => 0.0,
        }
    }
}

/// One completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub q: usize,
    /// Whether the subspace and set were freshly drawn this iteration.
    pub reset: bool,
    pub success: bool,
    pub rho_tilde: f64,
    /// Radius used by this iteration.
    pub delta: f64,
    pub f0_estimate: f64,
    pub fs_estimate: f64,
    pub noise_estimate: f64,
    pub model_reduction: f64,
    /// Fraction-of-Cauchy decrease the step had to achieve.
    pub cauchy_bound: f64,
    pub gradient_norm: f64,
    pub step_norm: f64,
    /// Estimates computed this iteration (interpolation points plus trial point).
    pub new_estimates: usize,
    pub shots_used_cumulative: u64,
    /// True objective at the incumbent after this iteration, when the oracle knows it.
    pub incumbent_true_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub x: DVector<f64>,
    pub delta: f64,
    pub q: usize,
    pub failure_flag: bool,
    pub basis: Option<SubspaceBasis>,
    pub set: Option<InterpolationSet>,
    pub model: Option<QuadraticSubspaceModel>,
    /// Estimate at the incumbent, reused until the incumbent moves.
    pub center: Option<Estimate>,
    pub k: usize,
    pub shots_used: u64,
    pub history: Vec<IterationRecord>,
}

impl OptimizerState {
    pub fn new(x0: DVector<f64>, config: &OptimizerConfig) -> Self {
        Self {
            x: x0,
            delta: config.delta0,
            q: config.q0,
            failure_flag: false,
            basis: None,
            set: None,
            model: None,
            center: None,
            k: 0,
            shots_used: 0,
            history: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Completed,
    /// The next iteration would overrun the shot budget; nothing was spent.
    BudgetExhausted,
    /// The radius fell below the float resolution at the incumbent, so new
    /// sample points would round back onto it.
    RadiusCollapsed,
}

/// Noise-aware ratio `(f0 − fs + r ε) / reduction`; `−∞` when the model
/// predicts no decrease.
pub fn compute_rho_tilde(f0: f64, fs: f64, noise: f64, r: f64, model_reduction: f64) -> f64 {
    if !(model_reduction > MIN_MODEL_REDUCTION) {
        return f64::NEG_INFINITY;
    }
    (f0 - fs + r * noise) / model_reduction
}

/// Smallest radius that still moves `x` in floating point.
pub fn radius_floor(x: &DVector<f64>) -> f64 {
    f64::EPSILON * x.amax().max(1.0)
}

/// Legal next subspace dimension after an iteration at `q`.
pub fn next_dimension(config: &OptimizerConfig, q: usize, success: bool) -> usize {
    if success || q + 1 > config.q_max {
        config.q0
    } else {
        q + 1
    }
}

struct Evaluator<'a, O: ?Sized, R> {
    oracle: &'a O,
    rng: &'a mut R,
    shots: usize,
}

impl<O: StochasticObjective + ?Sized, R: RngCore> Evaluator<'_, O, R> {
    fn at(&mut self, x: &DVector<f64>) -> Result<Estimate> {
        estimate_at(self.oracle, x.as_slice(), self.shots, self.rng)
    }

    fn at_offsets(&mut self, x: &DVector<f64>, basis: &SubspaceBasis, points: &[DVector<f64>]) -> Result<Vec<f64>> {
        points.iter().map(|s| Ok(self.at(&(x + basis.lift(s)))?.mean)).collect()
    }
}

/// Fresh-set branch: returns the basis, set and model, or `None` when the
/// budget cannot cover the iteration.
fn fresh_model<O, R>(
    state: &mut OptimizerState,
    config: &OptimizerConfig,
    eval: &mut Evaluator<'_, O, R>,
) -> Result<Option<(SubspaceBasis, InterpolationSet, QuadraticSubspaceModel, usize)>>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    let d = state.x.len();
    let q = config.q0;
    let points = generate_poised_set(q, state.delta, config.model_kind);
    let new_estimates = points.len() - 1 + usize::from(state.center.is_none()) + 1;
    if !fits_budget(state, config, new_estimates) {
        return Ok(None);
    }
    let basis = sample_haar_basis(d, q, eval.rng)?;
    if state.center.is_none() {
        state.center = Some(eval.at(&state.x)?);
    }
    let center = state.center.as_ref().expect("center estimate present").mean;
    let mut values = Vec::with_capacity(points.len());
    values.push(center);
    values.extend(eval.at_offsets(&state.x, &basis, &points[1..])?);
    let set = InterpolationSet::new(config.model_kind, points, values, state.delta)?;
    let model = build_model(&set)?;
    Ok(Some((basis, set, model, new_estimates)))
}

fn fits_budget(state: &OptimizerState, config: &OptimizerConfig, estimates: usize) -> bool {
    let cost = estimates as u64 * config.shots_per_estimate as u64;
    state.shots_used.saturating_add(cost) <= config.max_evaluations
}

/// Extension branch: grows the previous basis and set by one dimension.
/// Returns `Ok(None)` if the budget is insufficient and `Err(NotPoised)` if
/// the grown set would be degenerate; neither case spends shots.
fn extended_model<O, R>(
    state: &mut OptimizerState,
    config: &OptimizerConfig,
    eval: &mut Evaluator<'_, O, R>,
) -> Result<Option<(SubspaceBasis, InterpolationSet, QuadraticSubspaceModel, usize)>>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    let prev_set = state.set.as_ref().expect("extension requires a previous set");
    let prev_basis = state.basis.as_ref().expect("extension requires a previous basis");
    // diagonal sets place the new pair at q_hat times the failed iteration's
    // radius; linear/MFN sets put one point on the current boundary
    let zeta = match config.model_kind {
        ModelKind::Diagonal => prev_set.radius,
        ModelKind::Linear | ModelKind::Mfn => state.delta,
    };
    let fresh_points = extension_points(prev_set, zeta)?;
    let new_estimates = fresh_points.len() + 1;
    if !fits_budget(state, config, new_estimates) {
        return Ok(None);
    }
    // geometry alone decides poisedness, so check before spending shots
    let probe = extend_interpolation_set(prev_set, zeta, &vec![0.0; fresh_points.len()])?;
    build_model(&probe)?;

    let basis = extend_basis(prev_basis, eval.rng)?;
    let new_values = eval.at_offsets(&state.x, &basis, &fresh_points)?;
    let mut set = extend_interpolation_set(prev_set, zeta, &new_values)?;
    set.radius = state.delta;
    let model = match (config.model_kind, state.model.as_ref()) {
        (ModelKind::Linear, Some(prev)) => extend_linear_model(prev, zeta, new_values[0] - set.center_value())?,
        _ => build_model(&set)?,
    };
    Ok(Some((basis, set, model, new_estimates)))
}

fn step_impl<O, R>(
    algorithm: Algorithm,
    state: &mut OptimizerState,
    oracle: &O,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<StepOutcome>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    if !(state.delta >= radius_floor(&state.x)) {
        return Ok(StepOutcome::RadiusCollapsed);
    }
    let mut eval = Evaluator {
        oracle,
        rng,
        shots: config.shots_per_estimate,
    };
    let wants_reset = algorithm == Algorithm::Stars
        || !state.failure_flag
        || state.q + 1 > config.q_max
        || state.set.is_none()
        || state.basis.is_none();

    let mut reset = wants_reset;
    let built = if wants_reset {
        fresh_model(state, config, &mut eval)?
    } else {
        match extended_model(state, config, &mut eval) {
            Err(Error::NotPoised { .. }) => {
                reset = true;
                fresh_model(state, config, &mut eval)?
            }
            other => other?,
        }
    };
    let Some((basis, set, model, new_estimates)) = built else {
        return Ok(StepOutcome::BudgetExhausted);
    };
    let q = basis.dim();

    let delta = state.delta;
    let step = solve_tr_subproblem(&model, delta);
    let reduction = model_reduction(&model, &step);
    let cauchy_bound = cauchy_decrease_bound(&model.g, &model.h, delta);
    let trial_x = &state.x + basis.lift(&step);
    let trial = eval.at(&trial_x)?;

    let center = state.center.as_ref().expect("center estimate present");
    let rho = compute_rho_tilde(
        center.mean,
        trial.mean,
        center.std,
        config.ratio_weight(algorithm),
        reduction,
    );
    let gradient_norm = model.g.norm();
    let success = rho >= config.eta1 && gradient_norm >= config.eta2 * delta;

    let record_f0 = center.mean;
    let record_noise = center.std;
    let fs = trial.mean;

    if success {
        state.x = trial_x;
        state.center = Some(trial);
        state.delta = (config.gamma * delta).min(config.delta_max);
        state.failure_flag = false;
    } else {
        state.delta = delta / config.gamma;
        state.failure_flag = true;
    }
    state.shots_used += new_estimates as u64 * config.shots_per_estimate as u64;
    state.q = q;
    state.basis = Some(basis);
    state.set = Some(set);
    state.model = Some(model);

    state.history.push(IterationRecord {
        k: state.k,
        q,
        reset,
        success,
        rho_tilde: rho,
        delta,
        f0_estimate: record_f0,
        fs_estimate: fs,
        noise_estimate: record_noise,
        model_reduction: reduction,
        cauchy_bound,
        gradient_norm,
        step_norm: step.norm(),
        new_estimates,
        shots_used_cumulative: state.shots_used,
        incumbent_true_value: oracle.true_value(state.x.as_slice()),
    });
    state.k += 1;
    Ok(StepOutcome::Completed)
}

/// Performs one iteration of the adaptive method.
pub fn anastaars_step<O, R>(
    state: &mut OptimizerState,
    oracle: &O,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<StepOutcome>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    step_impl(Algorithm::Anastaars, state, oracle, config, rng)
}

/// Performs one iteration of the fixed-dimension baseline.
pub fn stars_step<O, R>(
    state: &mut OptimizerState,
    oracle: &O,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<StepOutcome>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    step_impl(Algorithm::Stars, state, oracle, config, rng)
}

/// Output of a complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    pub initial_x: DVector<f64>,
    pub initial_true_value: Option<f64>,
    pub final_x: DVector<f64>,
    pub records: Vec<IterationRecord>,
    pub shots_used: u64,
}

impl Trajectory {
    /// Best true objective seen at accepted incumbents, starting from `x0`.
    pub fn best_true_value(&self) -> Option<f64> {
        let mut best = self.initial_true_value?;
        for r in &self.records {
            if let Some(v) = r.incumbent_true_value {
                best = best.min(v);
            }
        }
        Some(best)
    }

    pub fn final_true_value(&self) -> Option<f64> {
        match self.records.last() {
            Some(r) => r.incumbent_true_value,
            None => self.initial_true_value,
        }
    }
}

/// Iterates until the shot budget is exhausted (or the radius collapses).
pub fn run<O, R>(
    algorithm: Algorithm,
    config: &OptimizerConfig,
    oracle: &O,
    x0: DVector<f64>,
    rng: &mut R,
) -> Result<Trajectory>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    let d = oracle.dim();
    if x0.len() != d {
        return Err(Error::Dimension(format!(
            "x0 has length {}, oracle expects {d}",
            x0.len()
        )));
    }
    config.validate(d)?;
    let initial_true_value = oracle.true_value(x0.as_slice());
    let mut state = OptimizerState::new(x0.clone(), config);
    while step_impl(algorithm, &mut state, oracle, config, rng)? == StepOutcome::Completed {}
    Ok(Trajectory {
        algorithm,
        initial_x: x0,
        initial_true_value,
        final_x: state.x,
        records: state.history,
        shots_used: state.shots_used,
    })
}

pub fn run_anastaars<O, R>(config: &OptimizerConfig, oracle: &O, x0: DVector<f64>, rng: &mut R) -> Result<Trajectory>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    run(Algorithm::Anastaars, config, oracle, x0, rng)
}

pub fn run_stars<O, R>(config: &OptimizerConfig, oracle: &O, x0: DVector<f64>, rng: &mut R) -> Result<Trajectory>
where
    O: StochasticObjective + ?Sized,
    R: RngCore,
{
    run(Algorithm::Stars, config, oracle, x0, rng)
}

/// Checks that the logged dimensions follow the reset/extend policy. Returns
/// the index of the first offending record.
pub fn check_dimension_trace(config: &OptimizerConfig, records: &[IterationRecord]) -> std::result::Result<(), usize> {
    let mut expected_reset = true;
    let mut prev: Option<&IterationRecord> = None;
    for (i, r) in records.iter().enumerate() {
        let legal = match prev {
            None => r.q == config.q0,
            Some(p) => {
                let next = next_dimension(config, p.q, p.success);
                // a degenerate extension falls back to a fresh q0 set
                r.q == next || (r.reset && r.q == config.q0)
            }
        };
        if !legal || (expected_reset && !r.reset) {
            return Err(i);
        }
        expected_reset = r.success || r.q + 1 > config.q_max;
        prev = Some(r);
    }
    Ok(())
}
