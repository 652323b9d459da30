//! Beam alignment for mmWave MIMO links by Bayesian optimization over the
//! continuous (AoD, AoA) domain, with codebook-sweep, OMP and Thompson
//! sampling baselines and a Monte-Carlo comparison harness.

pub mod acquisition;
pub mod baselines;
pub mod channel;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod optimizer;
pub mod selftest;
pub mod surrogates;

pub use channel::{BeamPair, ChannelParams, ChannelRealization, CodebookPair, Link};
pub use error::{Error, Result};
pub use harness::{CurvePoint, ExperimentConfig, Method};
pub use optimizer::{run_bo, BoConfig, RunTrace};
