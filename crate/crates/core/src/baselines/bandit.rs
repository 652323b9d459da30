//! Gaussian Thompson sampling with one arm per codebook pair.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{BeamPair, ChannelParams, CodebookPair, GridIndex, Link};
use crate::optimizer::RunTrace;

/// Normal-Normal model with known reward variance.
#[derive(Clone, Debug, PartialEq)]
pub struct TsConfig {
    pub prior_mean: f64,
    /// `None`: `(P_t·N_t·N_r·σ_a²)²`, the squared mean RSS of an aligned
    /// single path.
    pub prior_var: Option<f64>,
    /// `None`: `σ_n²·(1 + P_t/σ_n²)`.
    pub reward_var: Option<f64>,
}

impl Default for TsConfig {
    fn default() -> Self {
        Self {
            prior_mean: 0.0,
            prior_var: None,
            reward_var: None,
        }
    }
}

impl TsConfig {
    pub fn resolved_prior_var(&self, p: &ChannelParams) -> f64 {
        self.prior_var
            .unwrap_or_else(|| (p.p_t * (p.n_tx * p.n_rx) as f64 * p.sigma_a_sq).powi(2))
    }

    pub fn resolved_reward_var(&self, p: &ChannelParams) -> f64 {
        self.reward_var.unwrap_or(p.sigma_n_sq + p.p_t)
    }
}

/// Per-arm Normal posterior over the mean RSS.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub pulls: Vec<usize>,
}

impl ArmStats {
    pub fn new(n_arms: usize, prior_mean: f64, prior_var: f64) -> Self {
        Self {
            mean: vec![prior_mean; n_arms],
            var: vec![prior_var; n_arms],
            pulls: vec![0; n_arms],
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Conjugate update with one reward of known variance.
    pub fn update(&mut self, arm: usize, reward: f64, reward_var: f64) {
        let precision = 1.0 / self.var[arm] + 1.0 / reward_var;
        let var = 1.0 / precision;
        self.mean[arm] = var * (self.mean[arm] / self.var[arm] + reward / reward_var);
        self.var[arm] = var;
        self.pulls[arm] += 1;
    }

    /// One posterior draw per arm; index of the largest (lowest on ties).
    pub fn sample_argmax<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for arm in 0..self.len() {
            let eps: f64 = rng.sample(StandardNormal);
            let draw = self.mean[arm] + self.var[arm].sqrt() * eps;
            if draw > best.0 {
                best = (draw, arm);
            }
        }
        best.1
    }

    /// Arm with the highest posterior mean (lowest index on ties).
    pub fn best_mean(&self) -> usize {
        let mut best = 0;
        for arm in 1..self.len() {
            if self.mean[arm] > self.mean[best] {
                best = arm;
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct BanditResult {
    pub pair: BeamPair,
    pub index: GridIndex,
    pub trace: RunTrace,
    pub arms: ArmStats,
}

/// Runs `budget` Thompson-sampling pulls and recommends the arm with the
/// highest posterior mean.
pub fn ts_mab_align<R: Rng + ?Sized>(
    link: &mut Link<'_>,
    codebooks: &CodebookPair,
    budget: usize,
    config: &TsConfig,
    rng: &mut R,
) -> BanditResult {
    let params = link.params();
    let reward_var = config.resolved_reward_var(params);
    let mut arms = ArmStats::new(
        codebooks.grid_size(),
        config.prior_mean,
        config.resolved_prior_var(params),
    );
    let mut trace = RunTrace::new();
    for _ in 0..budget {
        let arm = arms.sample_argmax(rng);
        let idx = codebooks.index(arm);
        let rss = link.measure_rss_with(
            codebooks.rx.vector(idx.rx),
            codebooks.tx.vector(idx.tx),
            rng,
        );
        arms.update(arm, rss, reward_var);
        trace.push(codebooks.pair(idx), rss);
    }
    let index = codebooks.index(arms.best_mean());
    BanditResult {
        pair: codebooks.pair(index),
        index,
        trace,
        arms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_channel;
    use crate::numerics::derive_stream;

    /// Two-armed bandit with deterministic rewards 1.0 and 0.0.
    fn two_arm_run(seed: u64, budget: usize) -> usize {
        let mut arms = ArmStats::new(2, 0.0, 1.0);
        let mut rng = derive_stream(seed, &[]);
        for _ in 0..budget {
            let a = arms.sample_argmax(&mut rng);
            arms.update(a, if a == 0 { 1.0 } else { 0.0 }, 0.25);
        }
        arms.best_mean()
    }

    #[test]
    fn two_arm_sanity() {
        let wins = (0..100).filter(|&s| two_arm_run(s, 50) == 0).count();
        assert!(wins >= 95, "wins {wins}");
    }

    #[test]
    fn single_pull() {
        let params = ChannelParams::default();
        let cb = CodebookPair::dft(&params);
        let ch = draw_channel(&mut derive_stream(1, &[]), &params);
        let mut link = Link::new(&ch, &params);
        let r = ts_mab_align(
            &mut link,
            &cb,
            1,
            &TsConfig::default(),
            &mut derive_stream(1, &[1]),
        );
        assert_eq!(link.measurements(), 1);
        assert_eq!(r.arms.pulls.iter().sum::<usize>(), 1);
        let pulled = r.arms.pulls.iter().position(|&p| p == 1).unwrap();
        // a positive reward lifts the pulled arm above the zero prior mean
        if r.trace.records()[0].rss > 0.0 {
            assert_eq!(cb.flat(r.index), pulled);
        }
    }

    #[test]
    fn budget_bounds_distinct_arms_and_unpulled_keep_prior() {
        let params = ChannelParams::default();
        let cb = CodebookPair::dft(&params);
        let ch = draw_channel(&mut derive_stream(2, &[]), &params);
        let mut link = Link::new(&ch, &params);
        let cfg = TsConfig::default();
        let r = ts_mab_align(&mut link, &cb, 160, &cfg, &mut derive_stream(2, &[1]));
        assert_eq!(link.measurements(), 160);
        assert_eq!(r.arms.pulls.iter().sum::<usize>(), 160);
        assert!(r.arms.pulls.iter().filter(|&&p| p > 0).count() <= 160);
        let prior_var = cfg.resolved_prior_var(&params);
        for a in 0..r.arms.len() {
            assert!(r.arms.var[a] > 0.0);
            if r.arms.pulls[a] == 0 {
                assert_eq!(r.arms.mean[a], 0.0);
                assert_eq!(r.arms.var[a], prior_var);
            }
        }
        for w in r.trace.records().windows(2) {
            assert!(w[1].best_rss >= w[0].best_rss);
        }
    }
}
