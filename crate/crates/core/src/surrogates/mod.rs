//! Probabilistic regressors from a beam pair to a Gaussian predictive
//! distribution over its RSS.

mod forest;
mod gbrt;
mod gp;
mod tree;

pub use forest::{RfConfig, RfModel};
pub use gbrt::{GbrtConfig, GbrtModel};
pub use gp::{kernel, GpConfig, GpModel, InputScaling, SquaredExponential};
pub use tree::{RegressionTree, TreeConfig};

use rand::Rng;

use crate::channel::BeamPair;
use crate::error::{Error, Result};

/// Ordered `(beam pair, RSS)` observations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    points: Vec<BeamPair>,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(items: impl IntoIterator<Item = (BeamPair, f64)>) -> Self {
        let mut d = Self::new();
        for (z, y) in items {
            d.push(z, y);
        }
        d
    }

    pub fn push(&mut self, z: BeamPair, y: f64) {
        self.points.push(z);
        self.values.push(y);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[BeamPair] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest observed value; `None` on an empty dataset.
    pub fn best_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    /// Ready for fitting: nonempty and free of NaN/∞.
    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (index, (z, &y)) in self.points.iter().zip(&self.values).enumerate() {
            if !(y.is_finite() && z.theta.is_finite() && z.phi.is_finite()) {
                return Err(Error::NonFiniteObservation { index });
            }
        }
        Ok(())
    }

    pub(crate) fn features(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|z| [z.theta, z.phi]).collect()
    }
}

/// Gaussian predictive distribution `N(mu, sigma²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mu: f64,
    pub sigma: f64,
}

/// Fitted model that can be queried at any beam pair.
pub trait Surrogate {
    fn predict(&self, z: BeamPair) -> Prediction;

    /// Cheap posterior mean together with an upper bound on sigma.
    ///
    /// Models returning `Some` let the acquisition search skip exact
    /// variance evaluations that cannot change its answer.
    fn mean_with_sigma_bound(&self, _z: BeamPair) -> Option<(f64, f64)> {
        None
    }
}

/// Affine map between raw RSS and zero-mean, unit-variance targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Standardizer {
    pub mean: f64,
    pub scale: f64,
}

impl Standardizer {
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let first = values[0];
        if values.iter().all(|&v| v == first) {
            return Self {
                mean: first,
                scale: 1.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        Self { mean, scale }
    }

    pub fn forward(&self, y: f64) -> f64 {
        (y - self.mean) / self.scale
    }

    pub fn inverse(&self, p: Prediction) -> Prediction {
        Prediction {
            mu: self.mean + self.scale * p.mu,
            sigma: self.scale * p.sigma,
        }
    }
}

/// Which surrogate to fit, with its hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub enum SurrogateConfig {
    Gp(GpConfig),
    Gbrt(GbrtConfig),
    Rf(RfConfig),
}

impl SurrogateConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gp(_) => "GP",
            Self::Gbrt(_) => "GBRT",
            Self::Rf(_) => "RF",
        }
    }

    pub fn fit<R: Rng + ?Sized>(&self, data: &Dataset, rng: &mut R) -> Result<FittedSurrogate> {
        Ok(match self {
            Self::Gp(c) => FittedSurrogate::Gp(GpModel::fit(data, c)?),
            Self::Gbrt(c) => FittedSurrogate::Gbrt(GbrtModel::fit(data, c)?),
            Self::Rf(c) => FittedSurrogate::Rf(RfModel::fit(data, c, rng)?),
        })
    }
}

#[derive(Clone, Debug)]
pub enum FittedSurrogate {
    Gp(GpModel),
    Gbrt(GbrtModel),
    Rf(RfModel),
}

impl Surrogate for FittedSurrogate {
    fn predict(&self, z: BeamPair) -> Prediction {
        match self {
            Self::Gp(m) => m.predict(z),
            Self::Gbrt(m) => m.predict(z),
            Self::Rf(m) => m.predict(z),
        }
    }

    fn mean_with_sigma_bound(&self, z: BeamPair) -> Option<(f64, f64)> {
        match self {
            Self::Gp(m) => m.mean_with_sigma_bound(z),
            Self::Gbrt(m) => m.mean_with_sigma_bound(z),
            Self::Rf(m) => m.mean_with_sigma_bound(z),
        }
    }
}

/// Empirical mean and unbiased variance of ensemble member outputs.
///
/// Single-member ensembles report zero variance.
pub(crate) fn ensemble_moments(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        n += 1;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    let var = if n > 1 {
        (m2 / (n - 1) as f64).max(0.0)
    } else {
        0.0
    };
    (mean, var)
}
