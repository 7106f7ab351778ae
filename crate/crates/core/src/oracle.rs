//! Noisy objectives and shot-averaged estimates.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A stochastic objective `f(x) = E[f_θ(x)]` that can only be sampled.
pub trait StochasticObjective {
    fn dim(&self) -> usize;

    /// Draws `shots` independent realizations `f_θ(x)`.
    fn sample_batch(&self, x: &[f64], shots: usize, rng: &mut dyn rand::RngCore) -> Result<Vec<f64>>;

    /// Exact expectation, if known. Used for logging only, never by the optimizer.
    fn true_value(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: StochasticObjective + ?Sized> StochasticObjective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn sample_batch(&self, x: &[f64], shots: usize, rng: &mut dyn rand::RngCore) -> Result<Vec<f64>> {
        (**self).sample_batch(x, shots, rng)
    }

    fn true_value(&self, x: &[f64]) -> Option<f64> {
        (**self).true_value(x)
    }
}

/// Shot-averaged function value.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation with the `B − 1` denominator; 0 when `B = 1`.
    pub std: f64,
    pub shots: usize,
    pub samples: Vec<f64>,
}

impl Estimate {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        let shots = samples.len();
        if shots == 0 {
            return Err(Error::Oracle("an estimate needs at least one shot".into()));
        }
        let mean = samples.iter().sum::<f64>() / shots as f64;
        let std = if shots > 1 {
            let ss: f64 = samples.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (shots - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std,
            shots,
            samples,
        })
    }
}

/// Averages `shots` oracle samples at `x`. Consumes exactly `shots` samples.
pub fn estimate_at<O, R>(oracle: &O, x: &[f64], shots: usize, rng: &mut R) -> Result<Estimate>
where
    O: StochasticObjective + ?Sized,
    R: rand::RngCore,
{
    if shots == 0 {
        return Err(Error::Oracle("shot count must be at least 1".into()));
    }
    if x.len() != oracle.dim() {
        return Err(Error::Dimension(format!(
            "oracle expects {} parameters, got {}",
            oracle.dim(),
            x.len()
        )));
    }
    let samples = oracle.sample_batch(x, shots, rng)?;
    if samples.len() != shots {
        return Err(Error::Oracle(format!(
            "oracle returned {} samples for {shots} shots",
            samples.len()
        )));
    }
    Estimate::from_samples(samples)
}

/// `base(x) + σ z` with standard normal `z`.
pub struct GaussianNoiseOracle<F> {
    base: F,
    sigma: f64,
    dim: usize,
}

impl<F> GaussianNoiseOracle<F>
where
    F: Fn(&[f64]) -> f64,
{
    pub fn new(dim: usize, base: F, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::Config(format!("noise level must be nonnegative, got {sigma}")));
        }
        Ok(Self { base, sigma, dim })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

pub fn gaussian_noise_oracle<F>(dim: usize, base: F, sigma: f64) -> Result<GaussianNoiseOracle<F>>
where
    F: Fn(&[f64]) -> f64,
{
    GaussianNoiseOracle::new(dim, base, sigma)
}

impl<F> StochasticObjective for GaussianNoiseOracle<F>
where
    F: Fn(&[f64]) -> f64,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_batch(&self, x: &[f64], shots: usize, rng: &mut dyn rand::RngCore) -> Result<Vec<f64>> {
        let value = (self.base)(x);
        Ok((0..shots)
            .map(|_| {
                if self.sigma == 0.0 {
                    value
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    value + self.sigma * z
                }
            })
            .collect())
    }

    fn true_value(&self, x: &[f64]) -> Option<f64> {
        Some((self.base)(x))
    }
}
