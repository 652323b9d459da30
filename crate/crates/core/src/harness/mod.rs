//! Monte-Carlo experiment runner: spectral efficiency of every alignment
//! method, normalized by a full codebook sweep on the same channel.

mod config;
mod output;
mod sweep;

pub use config::{ExperimentConfig, Normalization};
pub use output::{
    format_sig, render_csv, render_trace_csv, write_csv, write_trace_csv, CSV_HEADER, TRACE_HEADER,
};
pub use sweep::{run_experiment, run_measurement_sweep, run_snr_sweep, single_run, SingleRun};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Alignment methods the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    GpBo,
    GbrtBo,
    RfBo,
    Omp,
    TsMab,
    Exhaustive,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::GpBo,
        Method::GbrtBo,
        Method::RfBo,
        Method::Omp,
        Method::TsMab,
        Method::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::GpBo => "GP-BO",
            Method::GbrtBo => "GBRT-BO",
            Method::RfBo => "RF-BO",
            Method::Omp => "OMP",
            Method::TsMab => "TS-MAB",
            Method::Exhaustive => "EXHAUSTIVE",
        }
    }

    pub fn is_bo(self) -> bool {
        matches!(self, Method::GpBo | Method::GbrtBo | Method::RfBo)
    }

    /// Stable identifier mixed into per-method RNG streams.
    pub fn stream_id(self) -> u64 {
        match self {
            Method::GpBo => 1,
            Method::GbrtBo => 2,
            Method::RfBo => 3,
            Method::Omp => 4,
            Method::TsMab => 5,
            Method::Exhaustive => 6,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .or(match key.as_str() {
                "GP" => Some(Method::GpBo),
                "GBRT" => Some(Method::GbrtBo),
                "RF" | "SMAC" | "SMAC-BO" => Some(Method::RfBo),
                "TS" | "MAB" => Some(Method::TsMab),
                "ES" => Some(Method::Exhaustive),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// One aggregated curve point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub method: Method,
    pub snr_db: f64,
    pub measurements: usize,
    pub mean_norm_se: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Ratio of a method's spectral efficiency to the exhaustive-search one.
pub fn normalized_spectral_efficiency(sp_x: f64, sp_es: f64) -> Result<f64> {
    if !(sp_es > 0.0) {
        return Err(Error::DegenerateBaseline { value: sp_es });
    }
    Ok(sp_x / sp_es)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_se_cases() {
        assert_eq!(normalized_spectral_efficiency(3.5, 3.5).unwrap(), 1.0);
        assert_eq!(normalized_spectral_efficiency(0.0, 2.0).unwrap(), 0.0);
        assert!(normalized_spectral_efficiency(4.0, 3.0).unwrap() > 1.0);
        assert!(matches!(
            normalized_spectral_efficiency(1.0, 0.0),
            Err(Error::DegenerateBaseline { .. })
        ));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("gbrt".parse::<Method>().unwrap(), Method::GbrtBo);
        assert!("nope".parse::<Method>().is_err());
    }
}
