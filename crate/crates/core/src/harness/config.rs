use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::Method;
use crate::baselines::TsConfig;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::optimizer::{BoConfig, QueryDomain, Recommendation};
use crate::surrogates::{GbrtConfig, GpConfig, InputScaling, RfConfig, SurrogateConfig};

/// How per-trial spectral efficiencies are combined into a curve point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Mean over trials of `SE(method) / SE(exhaustive)`.
    ///
    /// Heavy-tailed at low SNR: a noisy sweep that settles on a near-null
    /// pair leaves a denominator close to zero.
    PerTrial,
    /// `mean SE(method) / mean SE(exhaustive)`, with a delta-method
    /// standard error.
    RatioOfAverages,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Array geometry and powers; the noise variance is set per SNR point.
    pub channel: ChannelParams,
    pub snr_db: Vec<f64>,
    pub methods: Vec<Method>,
    /// Total measurement counts to score.
    pub budgets: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub m_init: usize,
    pub n_candidates: usize,
    pub domain: QueryDomain,
    pub recommendation: Recommendation,
    pub gp: GpConfig,
    pub gbrt: GbrtConfig,
    pub rf: RfConfig,
    /// `None`: the channel path count.
    pub omp_sparsity: Option<usize>,
    pub ts: TsConfig,
    pub normalization: Normalization,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            snr_db: vec![0.0],
            methods: Method::ALL.to_vec(),
            budgets: (1..=10).map(|k| 16 * k).collect(),
            trials: 200,
            seed: 2022,
            out: None,
            m_init: 16,
            n_candidates: 5000,
            domain: QueryDomain::Continuous,
            recommendation: Recommendation::BestObserved,
            gp: GpConfig::default(),
            gbrt: GbrtConfig::default(),
            rf: RfConfig::default(),
            omp_sparsity: None,
            ts: TsConfig::default(),
            normalization: Normalization::RatioOfAverages,
        }
    }
}

impl ExperimentConfig {
    /// Spectral efficiency against measurement count at 0 dB.
    pub fn measurement_sweep() -> Self {
        Self::default()
    }

    /// Spectral efficiency against SNR at 160 measurements.
    pub fn snr_sweep() -> Self {
        Self {
            snr_db: vec![-15.0, -10.0, -5.0, 0.0, 5.0],
            budgets: vec![160],
            ..Self::default()
        }
    }

    pub fn omp_sparsity(&self) -> usize {
        self.omp_sparsity.unwrap_or(self.channel.n_paths)
    }

    pub fn bo_config(&self, method: Method, budget: usize) -> Option<BoConfig> {
        let surrogate = match method {
            Method::GpBo => SurrogateConfig::Gp(self.gp.clone()),
            Method::GbrtBo => SurrogateConfig::Gbrt(self.gbrt.clone()),
            Method::RfBo => SurrogateConfig::Rf(self.rf.clone()),
            _ => return None,
        };
        Some(BoConfig {
            m_init: self.m_init,
            n_iters: budget.saturating_sub(self.m_init),
            surrogate,
            n_candidates: self.n_candidates,
            domain: self.domain,
            recommendation: self.recommendation,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.channel.validate()?;
        if self.methods.is_empty() {
            return bad("method list is empty".into());
        }
        if self.snr_db.is_empty() {
            return bad("SNR list is empty".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite".into());
        }
        if self.budgets.is_empty() {
            return bad("budget list is empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.m_init == 0 {
            return bad("m_init must be at least 1".into());
        }
        let grid = self.channel.n_tx * self.channel.n_rx;
        for &b in &self.budgets {
            if b > grid {
                return Err(Error::BudgetExceedsGrid { budget: b, grid });
            }
            if self.methods.iter().any(|m| m.is_bo()) && b < self.m_init {
                return bad(format!("budget {b} is below m_init {}", self.m_init));
            }
            if self.methods.contains(&Method::Omp) && b < self.omp_sparsity() {
                return Err(Error::BudgetTooSmall {
                    budget: b,
                    sparsity: self.omp_sparsity(),
                });
            }
            if b == 0 {
                return bad("budgets must be positive".into());
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ConfigParse {
                path: origin.to_path_buf(),
                line: n + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text, path)
    }

    /// Sets one documented key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_tx" => self.channel.n_tx = parse(key, value)?,
            "n_rx" => self.channel.n_rx = parse(key, value)?,
            "n_paths" => self.channel.n_paths = parse(key, value)?,
            "d_over_lambda" => self.channel.d_over_lambda = parse(key, value)?,
            "sigma_a_sq" => self.channel.sigma_a_sq = parse(key, value)?,
            "p_t" => self.channel.p_t = parse(key, value)?,
            "snr_db" => self.snr_db = parse_list(key, value)?,
            "methods" => self.methods = parse_list(key, value)?,
            "budgets" => self.budgets = parse_list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "m_init" => self.m_init = parse(key, value)?,
            "n_candidates" => self.n_candidates = parse(key, value)?,
            "query_domain" => {
                self.domain = match value {
                    "continuous" => QueryDomain::Continuous,
                    "grid" => QueryDomain::CodebookGrid,
                    _ => return Err(invalid(key, value)),
                }
            }
            "recommendation" => {
                self.recommendation = match value {
                    "best_observed" => Recommendation::BestObserved,
                    "surrogate_argmax" => Recommendation::SurrogateArgmax,
                    _ => return Err(invalid(key, value)),
                }
            }
            "gp_length_scale" => self.gp.length_scale = parse(key, value)?,
            "gp_jitter" => self.gp.jitter = parse(key, value)?,
            "gp_literal" => {
                if parse::<bool>(key, value)? {
                    self.gp.scaling = InputScaling::Radians;
                    self.gp.length_scale = 1.0;
                } else {
                    self.gp.scaling = InputScaling::UnitSquare;
                }
            }
            "gbrt_trees" => self.gbrt.n_trees = parse(key, value)?,
            "gbrt_learning_rate" => self.gbrt.learning_rate = parse(key, value)?,
            "gbrt_max_depth" => self.gbrt.max_depth = parse(key, value)?,
            "gbrt_min_leaf" => self.gbrt.min_leaf = parse(key, value)?,
            "rf_trees" => self.rf.n_trees = parse(key, value)?,
            "rf_max_depth" => self.rf.max_depth = parse(key, value)?,
            "rf_min_leaf" => self.rf.min_leaf = parse(key, value)?,
            "omp_sparsity" => self.omp_sparsity = Some(parse(key, value)?),
            "ts_prior_mean" => self.ts.prior_mean = parse(key, value)?,
            "ts_prior_var" => self.ts.prior_var = Some(parse(key, value)?),
            "ts_reward_var" => self.ts.reward_var = Some(parse(key, value)?),
            "normalization" => {
                self.normalization = match value {
                    "per_trial" => Normalization::PerTrial,
                    "ratio_of_averages" => Normalization::RatioOfAverages,
                    _ => return Err(invalid(key, value)),
                }
            }
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

fn invalid(key: &str, value: &str) -> Error {
    Error::InvalidConfig(format!("bad value `{value}` for `{key}`"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| invalid(key, value))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::measurement_sweep().validate().unwrap();
        ExperimentConfig::snr_sweep().validate().unwrap();
        assert_eq!(ExperimentConfig::snr_sweep().snr_db.len(), 5);
        assert_eq!(ExperimentConfig::measurement_sweep().budgets.len(), 10);
    }

    #[test]
    fn empty_method_list_is_rejected() {
        let c = ExperimentConfig {
            methods: vec![],
            ..ExperimentConfig::snr_sweep()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn budget_below_m_init_is_rejected() {
        let c = ExperimentConfig {
            budgets: vec![8],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn parses_flat_text() {
        let mut c = ExperimentConfig::default();
        let text = "# comment\ntrials = 7\nmethods = GBRT-BO, omp\nsnr_db = -5, 0.5\nnormalization = per_trial\ngp_literal = true\n";
        c.apply_text(text, Path::new("x.cfg")).unwrap();
        assert_eq!(c.trials, 7);
        assert_eq!(c.methods, vec![Method::GbrtBo, Method::Omp]);
        assert_eq!(c.snr_db, vec![-5.0, 0.5]);
        assert_eq!(c.normalization, Normalization::PerTrial);
        assert_eq!(c.gp.scaling, InputScaling::Radians);
    }

    #[test]
    fn parse_errors_carry_line() {
        let mut c = ExperimentConfig::default();
        let e = c
            .apply_text("trials = 3\nbogus = 1\n", Path::new("a.cfg"))
            .unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }), "{e}");
        let e = c.apply_text("trials\n", Path::new("a.cfg")).unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 1, .. }));
    }
}
