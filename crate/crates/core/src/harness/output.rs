use std::fmt::Write as _;
use std::path::Path;

use super::CurvePoint;
use crate::error::{Error, Result};
use crate::optimizer::RunTrace;

pub const CSV_HEADER: &str = "method,snr_db,measurements,mean_norm_se,stderr,trials";
pub const TRACE_HEADER: &str = "iter,theta,phi,rss,best_rss";

const SIG_DIGITS: i32 = 10;

/// `%.10g`-style formatting: 10 significant digits, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG_DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render_csv(points: &[CurvePoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.method.name(),
            format_sig(p.snr_db),
            p.measurements,
            format_sig(p.mean_norm_se),
            format_sig(p.stderr),
            p.trials
        );
    }
    out
}

pub fn render_trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace.records() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            format_sig(r.pair.theta),
            format_sig(r.pair.phi),
            format_sig(r.rss),
            format_sig(r.best_rss)
        );
    }
    out
}

/// Writes curve points in the order given.
pub fn write_csv(points: &[CurvePoint], path: &Path) -> Result<()> {
    write(path, render_csv(points))
}

pub fn write_trace_csv(trace: &RunTrace, path: &Path) -> Result<()> {
    write(path, render_trace_csv(trace))
}

fn write(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
