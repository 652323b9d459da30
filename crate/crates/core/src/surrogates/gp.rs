use std::f64::consts::PI;

use log::debug;

use super::{Dataset, Prediction, Standardizer, Surrogate};
use crate::channel::BeamPair;
use crate::error::{Error, Result};
use crate::numerics::{Cholesky, RealMatrix};

/// Coordinates the kernel sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputScaling {
    /// Both angles mapped affinely from `[-π/2, π/2]` onto `[0, 1]`.
    UnitSquare,
    /// Raw radians.
    Radians,
}

/// `exp(-½‖(a - b)/ℓ‖²)` on the chosen coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquaredExponential {
    pub length_scale: f64,
    pub scaling: InputScaling,
}

impl SquaredExponential {
    pub fn features(&self, z: BeamPair) -> [f64; 2] {
        match self.scaling {
            InputScaling::UnitSquare => [(z.theta + PI / 2.0) / PI, (z.phi + PI / 2.0) / PI],
            InputScaling::Radians => [z.theta, z.phi],
        }
    }

    pub fn eval(&self, a: BeamPair, b: BeamPair) -> f64 {
        self.eval_features(self.features(a), self.features(b))
    }

    fn eval_features(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d0 = a[0] - b[0];
        let d1 = a[1] - b[1];
        (-0.5 * (d0 * d0 + d1 * d1) / (self.length_scale * self.length_scale)).exp()
    }
}

pub fn kernel(k: &SquaredExponential, a: BeamPair, b: BeamPair) -> f64 {
    k.eval(a, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpConfig {
    pub length_scale: f64,
    pub scaling: InputScaling,
    /// Diagonal jitter on the kernel matrix, in units of the (unit)
    /// prior variance of the standardized targets.
    pub jitter: f64,
    /// Times the jitter is multiplied by 10 after a failed factorization.
    pub max_retries: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            length_scale: 0.1,
            scaling: InputScaling::UnitSquare,
            jitter: 1e-6,
            max_retries: 3,
        }
    }
}

impl GpConfig {
    /// Unit length-scale directly on radians.
    pub fn literal() -> Self {
        Self {
            length_scale: 1.0,
            scaling: InputScaling::Radians,
            ..Self::default()
        }
    }

    pub fn kernel(&self) -> SquaredExponential {
        SquaredExponential {
            length_scale: self.length_scale,
            scaling: self.scaling,
        }
    }
}

/// Zero-mean GP posterior conditioned on standardized observations.
#[derive(Clone, Debug)]
pub struct GpModel {
    kernel: SquaredExponential,
    inputs: Vec<[f64; 2]>,
    factor: Cholesky<f64>,
    /// `(K + jitter·I)⁻¹ y`
    weights: Vec<f64>,
    jitter: f64,
    standardizer: Standardizer,
}

impl GpModel {
    pub fn fit(data: &Dataset, config: &GpConfig) -> Result<Self> {
        data.validate()?;
        let kernel = config.kernel();
        let inputs: Vec<[f64; 2]> = data.points().iter().map(|&z| kernel.features(z)).collect();
        let standardizer = Standardizer::fit(data.values());
        let targets: Vec<f64> = data
            .values()
            .iter()
            .map(|&y| standardizer.forward(y))
            .collect();
        let n = inputs.len();
        let gram = RealMatrix::from_fn(n, n, |i, j| kernel.eval_features(inputs[i], inputs[j]));

        let mut jitter = config.jitter;
        let mut attempt = 0;
        let factor = loop {
            let mut k = gram.clone();
            for i in 0..n {
                k[(i, i)] += jitter;
            }
            match k.cholesky() {
                Ok(f) => break f,
                Err(e @ Error::NotPositiveDefinite { .. }) => {
                    if attempt == config.max_retries {
                        return Err(e);
                    }
                    attempt += 1;
                    debug!("GP factorization failed at jitter {jitter:e}; retrying");
                    jitter *= 10.0;
                }
                Err(e) => return Err(e),
            }
        };
        let weights = factor.solve(&targets);
        Ok(Self {
            kernel,
            inputs,
            factor,
            weights,
            jitter,
            standardizer,
        })
    }

    /// Jitter actually used after any retries.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn factor(&self) -> &Cholesky<f64> {
        &self.factor
    }

    fn cross_covariance(&self, z: BeamPair) -> Vec<f64> {
        let f = self.kernel.features(z);
        self.inputs
            .iter()
            .map(|&x| self.kernel.eval_features(f, x))
            .collect()
    }

    /// Posterior in standardized target units.
    pub fn latent_predict(&self, z: BeamPair) -> Prediction {
        let k = self.cross_covariance(z);
        let mu = k.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        let v = self.factor.solve_lower(&k);
        let var = 1.0 - v.iter().map(|x| x * x).sum::<f64>();
        Prediction {
            mu,
            sigma: var.max(0.0).sqrt(),
        }
    }
}

impl Surrogate for GpModel {
    fn predict(&self, z: BeamPair) -> Prediction {
        self.standardizer.inverse(self.latent_predict(z))
    }

    fn mean_with_sigma_bound(&self, z: BeamPair) -> Option<(f64, f64)> {
        let k = self.cross_covariance(z);
        let mu: f64 = k.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        // posterior variance never exceeds the unit prior variance
        let p = self.standardizer.inverse(Prediction { mu, sigma: 1.0 });
        Some((p.mu, p.sigma))
    }
}
