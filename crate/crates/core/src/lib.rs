//! Adaptive random-subspace stochastic trust-region optimization for noisy
//! objectives, with an exact QAOA MaxCut statevector simulator as testbed.
//!
//! - [`geometry`]: Haar subspace embeddings and their one-column extension.
//! - [`interp`]: linear, minimum-Frobenius-norm and diagonal-Hessian
//!   interpolation models, including point reuse when the subspace grows.
//! - [`trsub`]: the trust-region subproblem.
//! - [`optimizer`]: the adaptive method and the fixed-dimension baseline.
//! - [`oracle`]: noisy objectives and shot-averaged estimates.
//! - [`qaoa`]: MaxCut graphs, the cut Hamiltonian and QAOA circuits.
//! - [`parallel`]: trial-level data parallelism (feature `parallel`).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod interp;
pub mod optimizer;
pub mod oracle;
pub mod parallel;
pub mod qaoa;
pub mod trsub;

pub use error::{Error, Result};
pub use geometry::{alignment_ratio, extend_basis, sample_haar_basis, SubspaceBasis};
pub use interp::{InterpolationSet, ModelKind, QuadraticSubspaceModel};
pub use optimizer::{
    anastaars_step, compute_rho_tilde, run, run_anastaars, run_stars, Algorithm, IterationRecord, OptimizerConfig,
    OptimizerState, StepOutcome, Trajectory,
};
pub use oracle::{estimate_at, gaussian_noise_oracle, Estimate, GaussianNoiseOracle, StochasticObjective};
pub use qaoa::{chvatal_graph, cycle_graph, qaoa_oracle, Graph, GraphSource, QaoaAngles, QaoaOracle, StateVector};

/// Seeded random stream used throughout the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds a [`SeededRng`] from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
