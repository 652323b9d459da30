//! Comparison methods that operate on the codebook grid.

mod bandit;
mod exhaustive;
mod omp;

pub use bandit::{ts_mab_align, ArmStats, BanditResult, TsConfig};
pub use exhaustive::{exhaustive_search, ExhaustiveResult};
pub use omp::{omp_align, omp_solve, OmpResult, OmpSolution, SensingSystem};
