use std::path::Path;
use std::process::{Command, Output};

fn beamalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamalign"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sweep_snr_writes_sorted_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = beamalign(&[
            "sweep-snr",
            "--trials",
            "2",
            "--methods",
            "TS-MAB,OMP,EXHAUSTIVE",
            "--snr-db",
            "5,-15",
            "--budgets",
            "32",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "method,snr_db,measurements,mean_norm_se,stderr,trials"
    );
    let keys: Vec<(String, String)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    assert_eq!(
        keys,
        vec![
            ("EXHAUSTIVE".into(), "-15".into()),
            ("EXHAUSTIVE".into(), "5".into()),
            ("OMP".into(), "-15".into()),
            ("OMP".into(), "5".into()),
            ("TS-MAB".into(), "-15".into()),
            ("TS-MAB".into(), "5".into()),
        ]
    );
    assert!(lines[1].starts_with("EXHAUSTIVE,-15,1024,1,0,2"));
}

#[test]
fn single_run_dumps_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = beamalign(&[
        "single-run",
        "--methods",
        "TS-MAB",
        "--budgets",
        "40",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iter,theta,phi,rss,best_rss");
    assert_eq!(lines.len(), 41);
    let mut prev = f64::NEG_INFINITY;
    for (i, l) in lines[1..].iter().enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), i);
        let best: f64 = f[4].parse().unwrap();
        assert!(best >= prev);
        prev = best;
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# small run\ntrials = 3\nmethods = OMP\nbudgets = 16\nsnr_db = 0\n",
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let o = beamalign(&[
        "sweep-measurements",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("OMP,0,16,"));
    assert!(text.ends_with(",1\n"));
}

#[test]
fn rejects_bad_input() {
    assert!(!beamalign(&["sweep-snr", "--methods", "SIMPLEX"])
        .status
        .success());
    assert!(
        !beamalign(&["sweep-measurements", "--budgets", "8", "--methods", "GP-BO"])
            .status
            .success()
    );
    let o = beamalign(&["sweep-snr", "--config", "/nonexistent/x.cfg"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/x.cfg"));
}
