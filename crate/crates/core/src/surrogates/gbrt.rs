//! Least-squares gradient boosting with an ensemble-spread predictive
//! distribution.
//!
//! Each boosted tree `h_b` is turned into a full-model estimate
//! `s_b(z) = F_0 + T·ν·h_b(z)`. Their average is exactly the boosted
//! prediction `F_T(z) = F_0 + ν Σ h_b(z)`, and their unbiased sample
//! variance is the predictive variance.

use super::tree::{RegressionTree, TreeConfig};
use super::{ensemble_moments, Dataset, Prediction, Standardizer, Surrogate};
use crate::channel::BeamPair;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GbrtConfig {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for GbrtConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GbrtModel {
    base: f64,
    learning_rate: f64,
    trees: Vec<RegressionTree>,
    standardizer: Standardizer,
    training_loss: Vec<f64>,
}

impl GbrtModel {
    pub fn fit(data: &Dataset, config: &GbrtConfig) -> Result<Self> {
        data.validate()?;
        if config.n_trees == 0 || !(config.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(
                "GBRT needs at least one tree and a positive learning rate".into(),
            ));
        }
        let standardizer = Standardizer::fit(data.values());
        let y: Vec<f64> = data
            .values()
            .iter()
            .map(|&v| standardizer.forward(v))
            .collect();
        let x = data.features();
        let base = y.iter().sum::<f64>() / y.len() as f64;
        let tree_cfg = TreeConfig {
            max_depth: config.max_depth,
            min_leaf: config.min_leaf,
        };

        let mut fitted = vec![base; y.len()];
        let loss = |f: &[f64]| y.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut training_loss = Vec::with_capacity(config.n_trees + 1);
        training_loss.push(loss(&fitted));
        let mut trees = Vec::with_capacity(config.n_trees);
        for _ in 0..config.n_trees {
            let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
            let tree = RegressionTree::fit(&x, &residuals, &tree_cfg);
            for (f, xi) in fitted.iter_mut().zip(&x) {
                *f += config.learning_rate * tree.predict(*xi);
            }
            training_loss.push(loss(&fitted));
            trees.push(tree);
        }
        Ok(Self {
            base,
            learning_rate: config.learning_rate,
            trees,
            standardizer,
            training_loss,
        })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Standardized-unit intercept `F_0`.
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Sum of squared training residuals after each stage, `F_0` first,
    /// in standardized units.
    pub fn training_loss(&self) -> &[f64] {
        &self.training_loss
    }

    /// Per-tree full-model estimates `s_b(z)`, standardized units.
    pub fn member_estimates(&self, z: BeamPair) -> impl Iterator<Item = f64> + '_ {
        let scale = self.trees.len() as f64 * self.learning_rate;
        let x = [z.theta, z.phi];
        self.trees
            .iter()
            .map(move |t| self.base + scale * t.predict(x))
    }

    /// The boosted prediction `F_T(z)` in RSS units.
    pub fn boosted_prediction(&self, z: BeamPair) -> f64 {
        let x = [z.theta, z.phi];
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        let latent = self.base + self.learning_rate * sum;
        self.standardizer.mean + self.standardizer.scale * latent
    }

    /// Maps a standardized-unit prediction back to RSS units.
    pub fn to_rss_units(&self, p: Prediction) -> Prediction {
        self.standardizer.inverse(p)
    }
}

impl Surrogate for GbrtModel {
    fn predict(&self, z: BeamPair) -> Prediction {
        let (mu, var) = ensemble_moments(self.member_estimates(z));
        self.standardizer.inverse(Prediction {
            mu,
            sigma: var.sqrt(),
        })
    }
}
