//! Sequential model-based beam alignment: random codebook initialization,
//! then fit, acquire, measure, augment.

use rand::seq::index::sample;
use rand::Rng;

use crate::acquisition::{candidate_set, maximize_acquisition, AcquisitionState};
use crate::channel::{BeamPair, CodebookPair, Link};
use crate::error::{Error, Result};
use crate::surrogates::{Dataset, GbrtConfig, GpConfig, RfConfig, Surrogate, SurrogateConfig};

/// Where BO rounds may place their queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryDomain {
    /// Anywhere in `[-π/2, π/2]²`; codebook cross-points are added as
    /// extra candidates.
    Continuous,
    /// Only codebook cross-points.
    CodebookGrid,
}

/// How the final beam pair is chosen from an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recommendation {
    /// Pair with the highest measured RSS.
    BestObserved,
    /// Maximizer of the surrogate mean over a fresh candidate set.
    SurrogateArgmax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoConfig {
    pub m_init: usize,
    pub n_iters: usize,
    pub surrogate: SurrogateConfig,
    /// Uniform random candidates per acquisition round.
    pub n_candidates: usize,
    pub domain: QueryDomain,
    pub recommendation: Recommendation,
}

impl BoConfig {
    pub fn new(surrogate: SurrogateConfig) -> Self {
        Self {
            m_init: 16,
            n_iters: 144,
            surrogate,
            n_candidates: 5000,
            domain: QueryDomain::Continuous,
            recommendation: Recommendation::BestObserved,
        }
    }

    pub fn gp() -> Self {
        Self::new(SurrogateConfig::Gp(GpConfig::default()))
    }

    pub fn gbrt() -> Self {
        Self::new(SurrogateConfig::Gbrt(GbrtConfig::default()))
    }

    pub fn rf() -> Self {
        Self::new(SurrogateConfig::Rf(RfConfig::default()))
    }

    pub fn total_measurements(&self) -> usize {
        self.m_init + self.n_iters
    }

    pub fn validate(&self, grid_size: usize) -> Result<()> {
        if self.m_init == 0 {
            return Err(Error::InvalidConfig("m_init must be at least 1".into()));
        }
        if self.m_init > grid_size {
            return Err(Error::BudgetExceedsGrid {
                budget: self.m_init,
                grid: grid_size,
            });
        }
        if self.domain == QueryDomain::Continuous && self.n_candidates == 0 && grid_size == 0 {
            return Err(Error::InvalidConfig("acquisition has no candidates".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    /// Zero-based measurement index.
    pub iteration: usize,
    pub pair: BeamPair,
    pub rss: f64,
    pub best_rss: f64,
    pub best_pair: BeamPair,
}

/// Every measurement of an episode with its running maximum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, pair: BeamPair, rss: f64) {
        let (best_rss, best_pair) = match self.records.last() {
            Some(last) if last.best_rss >= rss => (last.best_rss, last.best_pair),
            _ => (rss, pair),
        };
        self.records.push(TraceRecord {
            iteration: self.records.len(),
            pair,
            rss,
            best_rss,
            best_pair,
        });
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The first `n` measurements.
    pub fn prefix(&self, n: usize) -> RunTrace {
        RunTrace {
            records: self.records[..n.min(self.records.len())].to_vec(),
        }
    }

    pub fn dataset(&self) -> Dataset {
        Dataset::from_pairs(self.records.iter().map(|r| (r.pair, r.rss)))
    }
}

/// Best observed pair; the earliest one on ties.
///
/// Panics on an empty trace.
pub fn final_alignment(trace: &RunTrace) -> BeamPair {
    trace.records().last().expect("empty trace").best_pair
}

/// Runs one episode; `observer` sees the dataset each surrogate is fit on.
pub fn run_bo_observed<R: Rng + ?Sized>(
    link: &mut Link<'_>,
    codebooks: &CodebookPair,
    config: &BoConfig,
    rng: &mut R,
    mut observer: impl FnMut(usize, &Dataset),
) -> Result<RunTrace> {
    let grid = codebooks.grid_pairs();
    config.validate(grid.len())?;

    let mut trace = RunTrace::new();
    let mut data = Dataset::new();
    for flat in sample(rng, grid.len(), config.m_init) {
        let z = grid[flat];
        let y = link.measure_rss(z, rng);
        trace.push(z, y);
        data.push(z, y);
    }

    let (n_random, fixed): (usize, &[BeamPair]) = match config.domain {
        QueryDomain::Continuous => (config.n_candidates, &grid),
        QueryDomain::CodebookGrid => (0, &grid),
    };
    for round in 1..=config.n_iters {
        observer(round, &data);
        let model = config.surrogate.fit(&data, rng)?;
        let state = AcquisitionState {
            f_best: data.best_value().expect("initialized dataset"),
        };
        let next = maximize_acquisition(&model, state, rng, n_random, fixed);
        let y = link.measure_rss(next.pair, rng);
        trace.push(next.pair, y);
        data.push(next.pair, y);
    }
    Ok(trace)
}

/// Bayesian-optimization beam alignment over one fixed channel.
pub fn run_bo<R: Rng + ?Sized>(
    link: &mut Link<'_>,
    codebooks: &CodebookPair,
    config: &BoConfig,
    rng: &mut R,
) -> Result<RunTrace> {
    run_bo_observed(link, codebooks, config, rng, |_, _| {})
}

/// Final pair of an episode (or episode prefix) under `config.recommendation`.
pub fn recommend<R: Rng + ?Sized>(
    trace: &RunTrace,
    codebooks: &CodebookPair,
    config: &BoConfig,
    rng: &mut R,
) -> Result<BeamPair> {
    match config.recommendation {
        Recommendation::BestObserved => Ok(final_alignment(trace)),
        Recommendation::SurrogateArgmax => {
            let model = config.surrogate.fit(&trace.dataset(), rng)?;
            let n_random = match config.domain {
                QueryDomain::Continuous => config.n_candidates,
                QueryDomain::CodebookGrid => 0,
            };
            let mut candidates = candidate_set(rng, n_random, &codebooks.grid_pairs());
            candidates.extend(trace.records().iter().map(|r| r.pair));
            let mut best = (f64::NEG_INFINITY, candidates[0]);
            for z in candidates {
                let mu = model.predict(z).mu;
                if mu > best.0 {
                    best = (mu, z);
                }
            }
            Ok(best.1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        beamforming_gain, draw_channel, ChannelParams, ChannelRealization, GridIndex, Path,
    };
    use crate::numerics::derive_stream;
    use num_complex::Complex64;

    fn small_params() -> ChannelParams {
        ChannelParams {
            n_tx: 16,
            n_rx: 8,
            n_paths: 2,
            ..ChannelParams::default()
        }
    }

    fn quick(surrogate: SurrogateConfig) -> BoConfig {
        BoConfig {
            m_init: 6,
            n_iters: 10,
            n_candidates: 200,
            ..BoConfig::new(surrogate)
        }
    }

    #[test]
    fn zero_rounds_is_initial_design() {
        let params = small_params();
        let cb = CodebookPair::dft(&params);
        let ch = draw_channel(&mut derive_stream(1, &[]), &params);
        let mut link = Link::new(&ch, &params);
        let cfg = BoConfig {
            n_iters: 0,
            ..quick(SurrogateConfig::Gp(GpConfig::default()))
        };
        let trace = run_bo(&mut link, &cb, &cfg, &mut derive_stream(1, &[1])).unwrap();
        assert_eq!(trace.len(), 6);
        assert_eq!(link.measurements(), 6);
        let grid = cb.grid_pairs();
        let mut seen = Vec::new();
        for r in trace.records() {
            assert!(grid.contains(&r.pair));
            assert!(!seen.contains(&r.pair));
            seen.push(r.pair);
        }
    }

    #[test]
    fn default_episode_length() {
        let cfg = BoConfig::gbrt();
        assert_eq!(cfg.total_measurements(), 160);
    }

    #[test]
    fn dataset_grows_one_per_round() {
        let params = small_params();
        let cb = CodebookPair::dft(&params);
        let ch = draw_channel(&mut derive_stream(2, &[]), &params);
        for cfg in [
            quick(SurrogateConfig::Gp(GpConfig::default())),
            quick(SurrogateConfig::Gbrt(GbrtConfig::default())),
            quick(SurrogateConfig::Rf(RfConfig::default())),
        ] {
            let mut link = Link::new(&ch, &params);
            let mut sizes = Vec::new();
            let trace = run_bo_observed(
                &mut link,
                &cb,
                &cfg,
                &mut derive_stream(2, &[1]),
                |round, d| sizes.push((round, d.len())),
            )
            .unwrap();
            assert_eq!(trace.len(), cfg.total_measurements());
            assert_eq!(link.measurements(), cfg.total_measurements());
            for (round, n) in sizes {
                assert_eq!(n, cfg.m_init + round - 1);
            }
            for w in trace.records().windows(2) {
                assert!(w[1].best_rss >= w[0].best_rss);
            }
            assert!(trace.records().iter().all(|r| r.pair.in_domain()));
        }
    }

    #[test]
    fn episodes_are_reproducible_and_prefix_consistent() {
        let params = small_params();
        let cb = CodebookPair::dft(&params);
        let ch = draw_channel(&mut derive_stream(3, &[]), &params);
        let cfg = quick(SurrogateConfig::Rf(RfConfig::default()));
        let run = |cfg: &BoConfig| {
            let mut link = Link::new(&ch, &params);
            run_bo(&mut link, &cb, cfg, &mut derive_stream(3, &[1])).unwrap()
        };
        let a = run(&cfg);
        let b = run(&cfg);
        assert_eq!(a, b);
        let short = run(&BoConfig {
            n_iters: 4,
            ..cfg.clone()
        });
        assert_eq!(short, a.prefix(10));
    }

    #[test]
    fn grid_domain_queries_stay_on_grid() {
        let params = small_params();
        let cb = CodebookPair::dft(&params);
        let ch = draw_channel(&mut derive_stream(4, &[]), &params);
        let cfg = BoConfig {
            domain: QueryDomain::CodebookGrid,
            ..quick(SurrogateConfig::Gbrt(GbrtConfig::default()))
        };
        let mut link = Link::new(&ch, &params);
        let trace = run_bo(&mut link, &cb, &cfg, &mut derive_stream(4, &[1])).unwrap();
        let grid = cb.grid_pairs();
        assert!(trace.records().iter().all(|r| grid.contains(&r.pair)));
    }

    #[test]
    fn final_alignment_rules() {
        let mut t = RunTrace::new();
        t.push(BeamPair::new(0.1, 0.1), 2.0);
        assert_eq!(final_alignment(&t), BeamPair::new(0.1, 0.1));
        t.push(BeamPair::new(0.2, 0.1), 2.0);
        assert_eq!(final_alignment(&t), BeamPair::new(0.1, 0.1));
        let mut inc = RunTrace::new();
        for i in 0..5 {
            inc.push(BeamPair::new(0.1 * i as f64, 0.0), i as f64);
        }
        assert_eq!(final_alignment(&inc), BeamPair::new(0.4, 0.0));
    }

    #[test]
    fn final_alignment_matches_linear_scan() {
        use rand::Rng;
        let mut rng = derive_stream(5, &[]);
        for _ in 0..50 {
            let mut t = RunTrace::new();
            for _ in 0..rng.random_range(1..40) {
                // coarse values force ties
                t.push(BeamPair::random(&mut rng), rng.random_range(0..6) as f64);
            }
            let mut best = 0;
            for (i, r) in t.records().iter().enumerate() {
                if r.rss > t.records()[best].rss {
                    best = i;
                }
            }
            assert_eq!(final_alignment(&t), t.records()[best].pair);
        }
    }

    #[test]
    fn surrogate_argmax_recommendation_is_in_domain() {
        let params = small_params();
        let cb = CodebookPair::dft(&params);
        let on = cb.pair(GridIndex { tx: 5, rx: 2 });
        let ch = ChannelRealization::from_paths(
            &params,
            vec![Path {
                alpha: Complex64::new(1.0, 0.0),
                theta: on.theta,
                phi: on.phi,
            }],
        );
        let cfg = BoConfig {
            recommendation: Recommendation::SurrogateArgmax,
            ..quick(SurrogateConfig::Gbrt(GbrtConfig::default()))
        };
        let mut link = Link::new(&ch, &params);
        let mut rng = derive_stream(6, &[]);
        let trace = run_bo(&mut link, &cb, &cfg, &mut rng).unwrap();
        let z = recommend(&trace, &cb, &cfg, &mut rng).unwrap();
        assert!(z.in_domain());
        assert!(beamforming_gain(&ch, z, &params) >= 0.0);
    }
}
