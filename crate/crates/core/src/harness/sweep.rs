use std::collections::BTreeMap;

use log::{debug, warn};
use rayon::prelude::*;

use super::{normalized_spectral_efficiency, CurvePoint, ExperimentConfig, Method, Normalization};
use crate::baselines::{exhaustive_search, omp_align, ts_mab_align};
use crate::channel::{
    beamforming_gain, draw_channel, spectral_efficiency, BeamPair, ChannelParams,
    ChannelRealization, CodebookPair, Link,
};
use crate::error::{Error, Result};
use crate::numerics::derive_stream;
use crate::optimizer::{recommend, run_bo, RunTrace};

const CHANNEL_STREAM: u64 = 0xC4A7;
const SWEEP_STREAM: u64 = 0xE5E5;
const METHOD_STREAM: u64 = 0x3E7D;
const RECOMMEND_STREAM: u64 = 0x8EC0;

/// Channel redraws allowed per trial before giving up.
const MAX_REDRAWS: usize = 100;

/// Spectral efficiencies of one (method, SNR, budget) cell in one trial.
#[derive(Clone, Copy, Debug)]
struct Sample {
    method: Method,
    snr_index: usize,
    measurements: usize,
    sp_x: f64,
    sp_es: f64,
}

/// Runs every trial and aggregates the curves, sorted by
/// (method, SNR, measurements).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    config.validate()?;
    let codebooks = CodebookPair::dft(&config.channel);
    let per_trial: Vec<Vec<Sample>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let s = run_trial(config, &codebooks, t);
            debug!("trial {t} done");
            s
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(config, per_trial.into_iter().flatten()))
}

/// Normalized spectral efficiency against measurement count.
pub fn run_measurement_sweep(config: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    run_experiment(config)
}

/// Normalized spectral efficiency against SNR at the largest budget.
pub fn run_snr_sweep(config: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let budget = *config
        .budgets
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidConfig("budget list is empty".into()))?;
    run_experiment(&ExperimentConfig {
        budgets: vec![budget],
        ..config.clone()
    })
}

fn run_trial(
    config: &ExperimentConfig,
    codebooks: &CodebookPair,
    trial: usize,
) -> Result<Vec<Sample>> {
    let mut rng = derive_stream(config.seed, &[CHANNEL_STREAM, trial as u64]);
    for _ in 0..MAX_REDRAWS {
        let channel = draw_channel(&mut rng, &config.channel);
        match score_trial(config, codebooks, trial, &channel) {
            Err(Error::DegenerateBaseline { value }) => {
                warn!("trial {trial}: exhaustive-search spectral efficiency {value}, redrawing channel");
            }
            other => return other,
        }
    }
    Err(Error::DegenerateBaseline { value: 0.0 })
}

fn score_trial(
    config: &ExperimentConfig,
    codebooks: &CodebookPair,
    trial: usize,
    channel: &ChannelRealization,
) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    let max_budget = *config.budgets.iter().max().expect("validated");
    for (snr_index, &snr_db) in config.snr_db.iter().enumerate() {
        let params = config.channel.with_snr_db(snr_db);
        let snr_key = snr_db.to_bits();
        let se =
            |pair: BeamPair| spectral_efficiency(beamforming_gain(channel, pair, &params), &params);

        let mut sweep_rng = derive_stream(config.seed, &[SWEEP_STREAM, trial as u64, snr_key]);
        let sweep = exhaustive_search(&mut Link::new(channel, &params), codebooks, &mut sweep_rng);
        let sp_es = se(sweep.pair);
        normalized_spectral_efficiency(0.0, sp_es)?;

        for &method in &config.methods {
            let wrap = |e: Error| Error::Trial {
                trial,
                method: method.name().to_string(),
                source: Box::new(e),
            };
            let mut push = |measurements: usize, pair: BeamPair| {
                samples.push(Sample {
                    method,
                    snr_index,
                    measurements,
                    sp_x: se(pair),
                    sp_es,
                })
            };
            let key = |extra: u64| {
                [
                    METHOD_STREAM,
                    trial as u64,
                    method.stream_id(),
                    snr_key,
                    extra,
                ]
            };
            match method {
                Method::Exhaustive => push(codebooks.grid_size(), sweep.pair),
                Method::GpBo | Method::GbrtBo | Method::RfBo => {
                    let full = config.bo_config(method, max_budget).expect("BO method");
                    let mut rng = derive_stream(config.seed, &key(0));
                    let trace =
                        run_bo(&mut Link::new(channel, &params), codebooks, &full, &mut rng)
                            .map_err(wrap)?;
                    for &b in &config.budgets {
                        let cfg = config.bo_config(method, b).expect("BO method");
                        let mut rec_rng = derive_stream(
                            config.seed,
                            &[
                                RECOMMEND_STREAM,
                                trial as u64,
                                method.stream_id(),
                                snr_key,
                                b as u64,
                            ],
                        );
                        let pair = recommend(&trace.prefix(b), codebooks, &cfg, &mut rec_rng)
                            .map_err(wrap)?;
                        push(b, pair);
                    }
                }
                Method::Omp => {
                    for &b in &config.budgets {
                        let mut rng = derive_stream(config.seed, &key(b as u64));
                        let r = omp_align(
                            &mut Link::new(channel, &params),
                            codebooks,
                            b,
                            config.omp_sparsity(),
                            &mut rng,
                        )
                        .map_err(wrap)?;
                        push(b, r.pair);
                    }
                }
                Method::TsMab => {
                    for &b in &config.budgets {
                        let mut rng = derive_stream(config.seed, &key(b as u64));
                        let r = ts_mab_align(
                            &mut Link::new(channel, &params),
                            codebooks,
                            b,
                            &config.ts,
                            &mut rng,
                        );
                        push(b, r.pair);
                    }
                }
            }
        }
    }
    Ok(samples)
}

/// `(method name, SNR index, measurements)`.
type CellKey = (&'static str, usize, usize);

fn aggregate(config: &ExperimentConfig, samples: impl Iterator<Item = Sample>) -> Vec<CurvePoint> {
    let mut cells: BTreeMap<CellKey, (Method, Vec<(f64, f64)>)> = BTreeMap::new();
    for s in samples {
        cells
            .entry((s.method.name(), s.snr_index, s.measurements))
            .or_insert_with(|| (s.method, Vec::new()))
            .1
            .push((s.sp_x, s.sp_es));
    }
    let mut points: Vec<CurvePoint> = cells
        .into_iter()
        .map(|((_, snr_index, measurements), (method, pairs))| {
            let (mean_norm_se, stderr) = summarize(&pairs, config.normalization);
            CurvePoint {
                method,
                snr_db: config.snr_db[snr_index],
                measurements,
                mean_norm_se,
                stderr,
                trials: pairs.len(),
            }
        })
        .collect();
    points.sort_by(|a, b| {
        a.method
            .name()
            .cmp(b.method.name())
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.measurements.cmp(&b.measurements))
    });
    points
}

/// Mean and standard error of the normalized spectral efficiency.
fn summarize(pairs: &[(f64, f64)], normalization: Normalization) -> (f64, f64) {
    let n = pairs.len() as f64;
    match normalization {
        Normalization::PerTrial => {
            let ratios: Vec<f64> = pairs.iter().map(|&(x, es)| x / es).collect();
            mean_and_stderr(&ratios)
        }
        Normalization::RatioOfAverages => {
            let sx: f64 = pairs.iter().map(|p| p.0).sum();
            let ses: f64 = pairs.iter().map(|p| p.1).sum();
            let ratio = sx / ses;
            // delta method on the linearized residuals
            let resid: Vec<f64> = pairs
                .iter()
                .map(|&(x, es)| (x - ratio * es) / (ses / n))
                .collect();
            (ratio, mean_and_stderr(&resid).1)
        }
    }
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One episode of one method on trial 0 at the first SNR and largest budget.
#[derive(Clone, Debug)]
pub struct SingleRun {
    pub method: Method,
    pub snr_db: f64,
    pub params: ChannelParams,
    pub trace: RunTrace,
    pub pair: BeamPair,
    pub spectral_efficiency: f64,
    pub sweep_spectral_efficiency: f64,
}

impl SingleRun {
    pub fn normalized(&self) -> Result<f64> {
        normalized_spectral_efficiency(self.spectral_efficiency, self.sweep_spectral_efficiency)
    }
}

pub fn single_run(config: &ExperimentConfig, method: Method) -> Result<SingleRun> {
    config.validate()?;
    let codebooks = CodebookPair::dft(&config.channel);
    let snr_db = config.snr_db[0];
    let params = config.channel.with_snr_db(snr_db);
    let budget = *config.budgets.iter().max().expect("validated");
    let snr_key = snr_db.to_bits();
    let mut channel_rng = derive_stream(config.seed, &[CHANNEL_STREAM, 0]);
    let channel = draw_channel(&mut channel_rng, &config.channel);
    let se =
        |pair: BeamPair| spectral_efficiency(beamforming_gain(&channel, pair, &params), &params);

    let mut sweep_rng = derive_stream(config.seed, &[SWEEP_STREAM, 0, snr_key]);
    let sweep = exhaustive_search(
        &mut Link::new(&channel, &params),
        &codebooks,
        &mut sweep_rng,
    );
    let mut rng = derive_stream(
        config.seed,
        &[METHOD_STREAM, 0, method.stream_id(), snr_key, 0],
    );
    let mut link = Link::new(&channel, &params);
    let (trace, pair) = match method {
        Method::Exhaustive => (sweep.trace.clone(), sweep.pair),
        Method::GpBo | Method::GbrtBo | Method::RfBo => {
            let cfg = config.bo_config(method, budget).expect("BO method");
            let trace = run_bo(&mut link, &codebooks, &cfg, &mut rng)?;
            let mut rec_rng = derive_stream(
                config.seed,
                &[
                    RECOMMEND_STREAM,
                    0,
                    method.stream_id(),
                    snr_key,
                    budget as u64,
                ],
            );
            let pair = recommend(&trace, &codebooks, &cfg, &mut rec_rng)?;
            (trace, pair)
        }
        Method::Omp => {
            let r = omp_align(
                &mut link,
                &codebooks,
                budget,
                config.omp_sparsity(),
                &mut rng,
            )?;
            (r.trace, r.pair)
        }
        Method::TsMab => {
            let r = ts_mab_align(&mut link, &codebooks, budget, &config.ts, &mut rng);
            (r.trace, r.pair)
        }
    };
    let spectral_efficiency = se(pair);
    let sweep_spectral_efficiency = se(sweep.pair);
    Ok(SingleRun {
        method,
        snr_db,
        params,
        trace,
        pair,
        spectral_efficiency,
        sweep_spectral_efficiency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(methods: Vec<Method>) -> ExperimentConfig {
        ExperimentConfig {
            methods,
            budgets: vec![16, 24],
            trials: 3,
            n_candidates: 200,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn exhaustive_row_is_unity() {
        let pts = run_experiment(&small(vec![Method::Exhaustive])).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].measurements, 1024);
        assert_eq!(pts[0].mean_norm_se, 1.0);
        assert_eq!(pts[0].stderr, 0.0);
        assert_eq!(pts[0].trials, 3);
    }

    #[test]
    fn rows_are_sorted_and_complete() {
        let cfg = ExperimentConfig {
            snr_db: vec![5.0, -5.0],
            ..small(vec![Method::TsMab, Method::Omp, Method::GbrtBo])
        };
        let pts = run_experiment(&cfg).unwrap();
        assert_eq!(pts.len(), 3 * 2 * 2);
        assert_eq!(pts[0].method, Method::GbrtBo);
        assert_eq!(pts[0].snr_db, -5.0);
        assert_eq!(pts.last().unwrap().method, Method::TsMab);
        for p in &pts {
            assert!(p.mean_norm_se.is_finite() && p.mean_norm_se >= 0.0);
        }
    }

    #[test]
    fn deterministic_and_order_free_across_method_lists() {
        let a = run_experiment(&small(vec![Method::Omp, Method::GbrtBo])).unwrap();
        let b = run_experiment(&small(vec![Method::GbrtBo])).unwrap();
        let a_bo: Vec<_> = a
            .into_iter()
            .filter(|p| p.method == Method::GbrtBo)
            .collect();
        assert_eq!(a_bo, b);
    }

    #[test]
    fn bo_budget_prefix_matches_standalone_run() {
        let two = run_experiment(&small(vec![Method::GbrtBo])).unwrap();
        let one = run_experiment(&ExperimentConfig {
            budgets: vec![16],
            ..small(vec![Method::GbrtBo])
        })
        .unwrap();
        assert_eq!(two[0], one[0]);
    }

    #[test]
    fn summarize_modes() {
        let pairs = [(1.0, 2.0), (3.0, 2.0)];
        let (m, s) = summarize(&pairs, Normalization::PerTrial);
        assert!((m - 1.0).abs() < 1e-15);
        assert!((s - 0.5).abs() < 1e-15);
        let (m, _) = summarize(&[(1.0, 1.0), (3.0, 3.0)], Normalization::RatioOfAverages);
        assert!((m - 1.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn means_lie_within_per_trial_range(
            pairs in proptest::collection::vec((0.0f64..10.0, 0.01f64..10.0), 1..50),
        ) {
            let hi = pairs.iter().map(|&(x, es)| x / es).fold(0.0, f64::max);
            for mode in [Normalization::PerTrial, Normalization::RatioOfAverages] {
                let (m, s) = summarize(&pairs, mode);
                proptest::prop_assert!(m >= 0.0 && m <= hi * (1.0 + 1e-12));
                proptest::prop_assert!(s >= 0.0);
            }
        }
    }

    #[test]
    fn single_run_trace_length() {
        let cfg = ExperimentConfig {
            budgets: vec![20],
            n_candidates: 100,
            ..ExperimentConfig::default()
        };
        let r = single_run(&cfg, Method::GpBo).unwrap();
        assert_eq!(r.trace.len(), 20);
        assert!(r.normalized().unwrap() >= 0.0);
    }
}
