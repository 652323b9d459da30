//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use beamalign::harness::{
    render_csv, run_experiment, write_csv, CurvePoint, ExperimentConfig, Method,
};
use beamalign::selftest::{self, CheckOutcome};

const SEED: u64 = 2022;
const TRIALS: usize = 200;
const SNRS: [f64; 5] = [-15.0, -10.0, -5.0, 0.0, 5.0];

struct Gate {
    failed: usize,
}

impl Gate {
    fn record(&mut self, n: usize, name: &str, passed: bool, detail: &str) {
        if !passed {
            self.failed += 1;
        }
        println!(
            "criterion {n}: {} {name} ({detail})",
            if passed { "PASS" } else { "FAIL" }
        );
    }

    fn check(&mut self, n: usize, c: CheckOutcome) {
        self.record(n, c.name, c.passed, &c.detail);
    }

    fn timed(&mut self, n: usize, limit: Duration, run: impl FnOnce() -> CheckOutcome) {
        let start = Instant::now();
        let c = run();
        let took = start.elapsed();
        let detail = format!(
            "{}; {:.1}s of {}s allowed",
            c.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
        self.record(n, c.name, c.passed && took < limit, &detail);
    }
}

fn point(points: &[CurvePoint], m: Method, snr: f64, b: usize) -> &CurvePoint {
    points
        .iter()
        .find(|p| p.method == m && p.snr_db == snr && p.measurements == b)
        .unwrap_or_else(|| panic!("missing point {m} {snr} dB {b}"))
}

fn budgets() -> Vec<usize> {
    (1..=10).map(|k| 16 * k).collect()
}

/// GBRT-BO against both baselines at 160 measurements, plus monotone BO
/// curves, at 0 dB.
fn measurement_trend(points: &[CurvePoint]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    let bo = point(points, Method::GbrtBo, 0.0, 160);
    for base in [Method::TsMab, Method::Omp] {
        let b = point(points, base, 0.0, 160);
        let margin = bo.mean_norm_se - b.mean_norm_se;
        let se = (bo.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        ok &= margin > 2.0 * se;
        detail.push(format!(
            "GBRT-BO {:.4} vs {base} {:.4}: margin {:.4}, 2SE {:.4}",
            bo.mean_norm_se,
            b.mean_norm_se,
            margin,
            2.0 * se
        ));
    }
    for m in [Method::GpBo, Method::GbrtBo, Method::RfBo] {
        let curve: Vec<&CurvePoint> = budgets()
            .into_iter()
            .map(|b| point(points, m, 0.0, b))
            .collect();
        let worst = curve
            .windows(2)
            .map(|w| (w[1].mean_norm_se - w[0].mean_norm_se) / w[0].stderr.max(w[1].stderr))
            .fold(f64::INFINITY, f64::min);
        ok &= worst >= -1.0;
        let values: Vec<String> = curve
            .iter()
            .map(|p| format!("{:.3}", p.mean_norm_se))
            .collect();
        detail.push(format!(
            "{m} curve [{}], worst step {worst:.2} SE",
            values.join(" ")
        ));
    }
    (ok, detail.join("; "))
}

/// GBRT-BO at or above both baselines at every SNR, with a wider gap at the
/// lowest SNR than at the highest.
fn snr_trend(points: &[CurvePoint]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for base in [Method::TsMab, Method::Omp] {
        let gaps: Vec<f64> = SNRS
            .iter()
            .map(|&s| {
                point(points, Method::GbrtBo, s, 160).mean_norm_se
                    - point(points, base, s, 160).mean_norm_se
            })
            .collect();
        ok &= gaps.iter().all(|&g| g >= 0.0);
        ok &= gaps[0] > gaps[SNRS.len() - 1];
        let g: Vec<String> = gaps.iter().map(|g| format!("{g:.3}")).collect();
        detail.push(format!("gap over {base} by SNR [{}]", g.join(" ")));
    }
    let bo: Vec<String> = SNRS
        .iter()
        .map(|&s| format!("{:.3}", point(points, Method::GbrtBo, s, 160).mean_norm_se))
        .collect();
    detail.push(format!("GBRT-BO [{}]", bo.join(" ")));
    (ok, detail.join("; "))
}

fn determinism() -> (bool, String) {
    let cfg = ExperimentConfig {
        snr_db: vec![-10.0, 0.0],
        budgets: vec![16, 32],
        trials: 4,
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().expect("tempdir");
    let mut files = Vec::new();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        let points = pool.install(|| run_experiment(&cfg)).expect("experiment");
        let path = dir.path().join(format!("run{threads}.csv"));
        write_csv(&points, &path).expect("write");
        files.push(std::fs::read(&path).expect("read"));
    }
    let same = files[0] == files[1];
    (
        same,
        format!(
            "{} bytes, reruns on 1 and 3 workers identical: {same}",
            files[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: 0 };

    gate.timed(1, Duration::from_secs(10), || {
        selftest::gp_oracle(100, SEED, 1e-8)
    });
    gate.timed(2, Duration::from_secs(30), || {
        selftest::ei_monte_carlo(50, 1_000_000, SEED, 0.01)
    });
    gate.check(3, selftest::omp_recovery(100, 160, SEED));
    gate.check(4, selftest::exhaustive_oracle(100, SEED));
    gate.check(5, selftest::monotonicity(1000, 8, 100, SEED));

    let start = Instant::now();
    let fig2 = run_experiment(&ExperimentConfig {
        snr_db: vec![0.0],
        budgets: budgets(),
        trials: TRIALS,
        seed: SEED,
        methods: vec![
            Method::GpBo,
            Method::GbrtBo,
            Method::RfBo,
            Method::Omp,
            Method::TsMab,
        ],
        ..ExperimentConfig::default()
    })
    .expect("measurement sweep");
    let fig2_time = start.elapsed();
    let (ok, detail) = measurement_trend(&fig2);
    gate.record(
        6,
        "BO ahead of baselines at 160 measurements, monotone BO curves",
        ok && fig2_time < Duration::from_secs(30 * 60),
        &format!("{detail}; {:.0}s", fig2_time.as_secs_f64()),
    );

    let others = run_experiment(&ExperimentConfig {
        snr_db: SNRS.iter().copied().filter(|&s| s != 0.0).collect(),
        budgets: vec![160],
        trials: TRIALS,
        seed: SEED,
        methods: vec![Method::GbrtBo, Method::Omp, Method::TsMab],
        ..ExperimentConfig::default()
    })
    .expect("SNR sweep");
    let mut fig3: Vec<CurvePoint> = others;
    fig3.extend(fig2.iter().filter(|p| p.measurements == 160).cloned());
    let (ok, detail) = snr_trend(&fig3);
    gate.record(
        7,
        "BO ahead of baselines at every SNR, widest at low SNR",
        ok,
        &detail,
    );

    let (ok, detail) = determinism();
    gate.record(8, "byte-identical CSV on rerun", ok, &detail);

    gate.check(9, selftest::gbrt_identity(100, 10, SEED, 1e-12));

    print!("{}", render_csv(&fig2));
    if gate.failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failed);
        ExitCode::FAILURE
    }
}
