//! Oracle suites shared by the `selftest` subcommand and the acceptance
//! tests. Every oracle recomputes its reference independently of the code
//! path it checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::acquisition::expected_improvement;
use crate::baselines::{exhaustive_search, omp_align, ts_mab_align, TsConfig};
use crate::channel::{
    draw_channel, BeamPair, ChannelParams, ChannelRealization, CodebookPair, GridIndex, Link, Path,
};
use crate::numerics::{derive_stream, sample_complex_gaussian};
use crate::optimizer::{run_bo, BoConfig, RunTrace};
use crate::surrogates::{
    Dataset, GbrtConfig, GbrtModel, GpConfig, GpModel, InputScaling, Surrogate, SurrogateConfig,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Solves `A X = B` for several right-hand sides by Gaussian elimination
/// with partial pivoting. Returns `None` on a zero pivot.
pub fn gaussian_elimination(a: &[Vec<f64>], rhs: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let k = rhs.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|b| b[i]));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..n + k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![vec![0.0; n]; k];
    for (j, xj) in x.iter_mut().enumerate() {
        for i in (0..n).rev() {
            let mut s = m[i][n + j];
            for c in i + 1..n {
                s -= m[i][c] * xj[c];
            }
            xj[i] = s / m[i][i];
        }
    }
    Some(x)
}

/// GP posterior mean and variance by conditioning the joint Gaussian of
/// `(f(X), f(z))` directly. Targets are standardized by their mean and
/// population standard deviation; `jitter` is added to the training block.
pub fn gp_brute_force(
    data: &Dataset,
    length_scale: f64,
    unit_square: bool,
    jitter: f64,
    z: BeamPair,
) -> Option<(f64, f64)> {
    let map = |p: BeamPair| {
        if unit_square {
            [(p.theta + PI / 2.0) / PI, (p.phi + PI / 2.0) / PI]
        } else {
            [p.theta, p.phi]
        }
    };
    let k = |a: [f64; 2], b: [f64; 2]| {
        let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        (-d2 / (2.0 * length_scale * length_scale)).exp()
    };
    let xs: Vec<[f64; 2]> = data.points().iter().map(|&p| map(p)).collect();
    let ys = data.values();
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let (mean, scale) = if ys.iter().all(|&y| y == ys[0]) {
        (ys[0], 1.0)
    } else if var > 0.0 {
        (mean, var.sqrt())
    } else {
        (mean, 1.0)
    };
    let t: Vec<f64> = ys.iter().map(|y| (y - mean) / scale).collect();
    let zq = map(z);
    let sigma_xx: Vec<Vec<f64>> = xs
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            xs.iter()
                .enumerate()
                .map(|(j, &b)| k(a, b) + if i == j { jitter } else { 0.0 })
                .collect()
        })
        .collect();
    let sigma_xz: Vec<f64> = xs.iter().map(|&a| k(a, zq)).collect();
    let sol = gaussian_elimination(&sigma_xx, &[t, sigma_xz.clone()])?;
    let mu: f64 = sigma_xz.iter().zip(&sol[0]).map(|(a, b)| a * b).sum();
    let reduction: f64 = sigma_xz.iter().zip(&sol[1]).map(|(a, b)| a * b).sum();
    Some((mean + scale * mu, scale * scale * (k(zq, zq) - reduction)))
}

/// GP predictions against brute-force conditioning on random instances
/// with up to 20 samples.
pub fn gp_oracle(instances: usize, seed: u64, tolerance: f64) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for inst in 0..instances {
        let mut rng = derive_stream(seed, &[0x6A, inst as u64]);
        let m = rng.random_range(1..=20usize);
        let literal = inst % 4 == 3;
        let cfg = if literal {
            GpConfig::literal()
        } else {
            GpConfig::default()
        };
        let offset: f64 = rng.random_range(-5.0..5.0);
        let spread: f64 = rng.random_range(0.1..100.0);
        let data = Dataset::from_pairs((0..m).map(|_| {
            (
                BeamPair::random(&mut rng),
                offset + spread * rng.random::<f64>(),
            )
        }));
        let model = match GpModel::fit(&data, &cfg) {
            Ok(model) => model,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let unit_square = cfg.scaling == InputScaling::UnitSquare;
        for q in 0..5 {
            let z = if q == 0 {
                data.points()[0]
            } else {
                BeamPair::random(&mut rng)
            };
            let Some((mu_o, var_o)) =
                gp_brute_force(&data, cfg.length_scale, unit_square, model.jitter(), z)
            else {
                failures += 1;
                continue;
            };
            let p = model.predict(z);
            let scale = spread_scale(data.values());
            let e_mu = (p.mu - mu_o).abs() / mu_o.abs().max(scale);
            let e_var = (p.sigma * p.sigma - var_o.max(0.0)).abs() / var_o.abs().max(scale * scale);
            let e = e_mu.max(e_var);
            worst = worst.max(e);
            if !(e <= tolerance) {
                failures += 1;
            }
        }
    }
    CheckOutcome::new(
        "GP posterior vs brute-force conditioning",
        failures == 0,
        format!("{instances} instances, worst relative error {worst:.2e}, {failures} failures (tol {tolerance:e})"),
    )
}

fn spread_scale(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        var.sqrt()
    } else {
        1.0
    }
}

/// Closed-form expected improvement against a Monte-Carlo estimate of
/// `E[max(0, X - f_best)]`.
pub fn ei_monte_carlo(triples: usize, samples: usize, seed: u64, rel_tol: f64) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..triples {
        let mut rng = derive_stream(seed, &[0xE1, i as u64]);
        let mu: f64 = rng.random_range(-3.0..3.0);
        let sigma: f64 = rng.random_range(0.05..3.0);
        let f_best = mu + sigma * rng.random_range(-1.0..1.0);
        let mut acc = 0.0;
        for _ in 0..samples {
            let e: f64 = rng.sample(StandardNormal);
            acc += (mu + sigma * e - f_best).max(0.0);
        }
        let mc = acc / samples as f64;
        let ei = expected_improvement(mu, sigma, f_best);
        let rel = (ei - mc).abs() / mc;
        worst = worst.max(rel);
        if !(rel <= rel_tol) {
            failures += 1;
        }
    }
    CheckOutcome::new(
        "expected improvement vs Monte-Carlo",
        failures == 0,
        format!("{triples} triples x {samples} samples, worst relative error {worst:.2e}, {failures} failures"),
    )
}

/// OMP with sparsity 1 on a noiseless single on-grid path.
pub fn omp_recovery(trials: usize, budget: usize, seed: u64) -> CheckOutcome {
    let params = ChannelParams {
        n_paths: 1,
        sigma_n_sq: 0.0,
        ..ChannelParams::default()
    };
    let cb = CodebookPair::dft(&params);
    let mut hits = 0;
    let mut probed = 0;
    for t in 0..trials {
        let mut rng = derive_stream(seed, &[0x03, t as u64]);
        let target = GridIndex {
            tx: rng.random_range(0..cb.tx.len()),
            rx: rng.random_range(0..cb.rx.len()),
        };
        let ch = planted_path(&params, &cb, target, &mut rng);
        let mut link = Link::new(&ch, &params);
        match omp_align(&mut link, &cb, budget, 1, &mut rng) {
            Ok(r) => {
                if r.index == target {
                    hits += 1;
                }
                let z = cb.pair(target);
                if r.trace.records().iter().any(|rec| rec.pair == z) {
                    probed += 1;
                }
            }
            Err(_) => continue,
        }
    }
    CheckOutcome::new(
        "OMP exact recovery of a planted on-grid path",
        hits == trials,
        format!(
            "{hits}/{trials} recovered; planted pair was among the probes in {probed}/{trials}"
        ),
    )
}

fn planted_path<R: Rng + ?Sized>(
    params: &ChannelParams,
    cb: &CodebookPair,
    idx: GridIndex,
    rng: &mut R,
) -> ChannelRealization {
    let z = cb.pair(idx);
    let alpha = sample_complex_gaussian(rng, 1, 1.0)[0];
    ChannelRealization::from_paths(
        params,
        vec![Path {
            alpha,
            theta: z.theta,
            phi: z.phi,
        }],
    )
}

/// Noiseless exhaustive search against a brute-force grid scan that
/// rebuilds the beamformers from the array geometry.
pub fn exhaustive_oracle(channels: usize, seed: u64) -> CheckOutcome {
    let params = ChannelParams {
        sigma_n_sq: 0.0,
        ..ChannelParams::default()
    };
    let cb = CodebookPair::dft(&params);
    let mut hits = 0;
    for c in 0..channels {
        let mut rng = derive_stream(seed, &[0x04, c as u64]);
        let ch = draw_channel(&mut rng, &params);
        let mut link = Link::new(&ch, &params);
        let r = exhaustive_search(&mut link, &cb, &mut rng);
        if cb.flat(r.index) == brute_force_grid_argmax(&ch, &params) {
            hits += 1;
        }
    }
    CheckOutcome::new(
        "exhaustive search vs noiseless grid argmax",
        hits == channels,
        format!("{hits}/{channels} matched"),
    )
}

fn brute_force_grid_argmax(ch: &ChannelRealization, p: &ChannelParams) -> usize {
    let beam = |n: usize, g: usize, i: usize| -> Vec<Complex64> {
        let psi = -1.0 + 2.0 * i as f64 / g as f64;
        let s = psi.clamp(-1.0, 1.0);
        (0..n)
            .map(|k| {
                Complex64::from_polar(
                    1.0 / (n as f64).sqrt(),
                    2.0 * PI * p.d_over_lambda * k as f64 * s,
                )
            })
            .collect()
    };
    let (g_tx, g_rx) = (p.n_tx, p.n_rx);
    let tx: Vec<Vec<Complex64>> = (0..g_tx).map(|i| beam(p.n_tx, g_tx, i)).collect();
    let rx: Vec<Vec<Complex64>> = (0..g_rx).map(|i| beam(p.n_rx, g_rx, i)).collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for r in 0..g_rx {
        for t in 0..g_tx {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..p.n_rx {
                let mut hv = Complex64::new(0.0, 0.0);
                for j in 0..p.n_tx {
                    hv += ch.h[(i, j)] * tx[t][j];
                }
                acc += rx[r][i].conj() * hv;
            }
            let g = acc.norm_sqr();
            if g > best.0 {
                best = (g, r * g_tx + t);
            }
        }
    }
    best.1
}

fn running_max_ok(trace: &RunTrace) -> bool {
    let mut max = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for rec in trace.records() {
        max = max.max(rec.rss);
        if rec.best_rss < prev || rec.best_rss != max {
            return false;
        }
        prev = rec.best_rss;
    }
    true
}

/// Best-so-far monotonicity on BO and bandit episodes, and staged GBRT
/// training loss on random datasets.
///
/// BO episodes cycle through the three surrogates with `bo_iters` rounds
/// after 16 initial measurements.
pub fn monotonicity(episodes: usize, bo_iters: usize, datasets: usize, seed: u64) -> CheckOutcome {
    let params = ChannelParams::default();
    let cb = CodebookPair::dft(&params);
    let surrogates = [
        SurrogateConfig::Gp(GpConfig::default()),
        SurrogateConfig::Gbrt(GbrtConfig::default()),
        SurrogateConfig::Rf(Default::default()),
    ];
    let mut bad_bo = 0;
    let mut bad_mab = 0;
    for e in 0..episodes {
        let mut rng = derive_stream(seed, &[0x05, e as u64]);
        let snr = rng.random_range(-15.0..5.0);
        let p = params.with_snr_db(snr);
        let ch = draw_channel(&mut rng, &p);
        let cfg = BoConfig {
            n_iters: bo_iters,
            n_candidates: 500,
            ..BoConfig::new(surrogates[e % 3].clone())
        };
        match run_bo(&mut Link::new(&ch, &p), &cb, &cfg, &mut rng) {
            Ok(trace) if running_max_ok(&trace) => {}
            _ => bad_bo += 1,
        }
        let r = ts_mab_align(
            &mut Link::new(&ch, &p),
            &cb,
            160,
            &TsConfig::default(),
            &mut rng,
        );
        if !running_max_ok(&r.trace) {
            bad_mab += 1;
        }
    }
    let mut bad_loss = 0;
    for d in 0..datasets {
        let mut rng = derive_stream(seed, &[0x55, d as u64]);
        let n = rng.random_range(2..=80usize);
        let data = Dataset::from_pairs(
            (0..n).map(|_| (BeamPair::random(&mut rng), rng.random_range(0.0..200.0))),
        );
        match GbrtModel::fit(&data, &GbrtConfig::default()) {
            Ok(m) if m.training_loss().windows(2).all(|w| w[1] <= w[0]) => {}
            _ => bad_loss += 1,
        }
    }
    CheckOutcome::new(
        "monotone best-so-far and GBRT staged loss",
        bad_bo + bad_mab + bad_loss == 0,
        format!(
            "{episodes} BO + {episodes} bandit episodes ({bad_bo} + {bad_mab} violations), {datasets} GBRT fits ({bad_loss} violations)"
        ),
    )
}

/// GBRT predictive mean against the boosted prediction `F_T`.
pub fn gbrt_identity(models: usize, queries_per_model: usize, seed: u64, tol: f64) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for m in 0..models {
        let mut rng = derive_stream(seed, &[0x09, m as u64]);
        let n = rng.random_range(1..=60usize);
        let data = Dataset::from_pairs(
            (0..n).map(|_| (BeamPair::random(&mut rng), rng.random_range(0.0..200.0))),
        );
        let Ok(model) = GbrtModel::fit(&data, &GbrtConfig::default()) else {
            failures += queries_per_model;
            continue;
        };
        for _ in 0..queries_per_model {
            let z = BeamPair::random(&mut rng);
            let f = model.boosted_prediction(z);
            let e = (model.predict(z).mu - f).abs() / f.abs().max(1.0);
            worst = worst.max(e);
            if !(e <= tol) {
                failures += 1;
            }
        }
    }
    CheckOutcome::new(
        "GBRT mean equals boosted prediction",
        failures == 0,
        format!(
            "{} pairs, worst relative error {worst:.2e}, {failures} failures",
            models * queries_per_model
        ),
    )
}

/// Every oracle suite at its full size.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        gp_oracle(100, seed, 1e-8),
        ei_monte_carlo(50, 1_000_000, seed, 0.01),
        omp_recovery(100, 160, seed),
        exhaustive_oracle(100, seed),
        monotonicity(1000, 4, 100, seed),
        gbrt_identity(100, 10, seed, 1e-12),
    ]
}
