use rand::Rng;

use super::tree::{RegressionTree, TreeConfig};
use super::{ensemble_moments, Dataset, Prediction, Standardizer, Surrogate};
use crate::channel::BeamPair;
use crate::error::{Error, Result};

/// Bagged regression trees, SMAC style.
#[derive(Clone, Debug, PartialEq)]
pub struct RfConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 8,
            min_leaf: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RfModel {
    trees: Vec<RegressionTree>,
    standardizer: Standardizer,
}

impl RfModel {
    /// Fits every tree on its own bootstrap resample of size `data.len()`.
    pub fn fit<R: Rng + ?Sized>(data: &Dataset, config: &RfConfig, rng: &mut R) -> Result<Self> {
        data.validate()?;
        if config.n_trees == 0 {
            return Err(Error::InvalidConfig(
                "random forest needs at least one tree".into(),
            ));
        }
        let standardizer = Standardizer::fit(data.values());
        let y: Vec<f64> = data
            .values()
            .iter()
            .map(|&v| standardizer.forward(v))
            .collect();
        let x = data.features();
        let n = y.len();
        let tree_cfg = TreeConfig {
            max_depth: config.max_depth,
            min_leaf: config.min_leaf,
        };
        let trees = (0..config.n_trees)
            .map(|_| {
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let bx: Vec<[f64; 2]> = rows.iter().map(|&i| x[i]).collect();
                let by: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
                RegressionTree::fit(&bx, &by, &tree_cfg)
            })
            .collect();
        Ok(Self {
            trees,
            standardizer,
        })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Individual tree outputs in RSS units.
    pub fn tree_predictions(&self, z: BeamPair) -> Vec<f64> {
        self.trees
            .iter()
            .map(|t| self.standardizer.mean + self.standardizer.scale * t.predict([z.theta, z.phi]))
            .collect()
    }
}

impl Surrogate for RfModel {
    fn predict(&self, z: BeamPair) -> Prediction {
        let x = [z.theta, z.phi];
        let (mu, var) = ensemble_moments(self.trees.iter().map(|t| t.predict(x)));
        self.standardizer.inverse(Prediction {
            mu,
            sigma: var.sqrt(),
        })
    }
}
