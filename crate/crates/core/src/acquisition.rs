//! Expected Improvement and its maximization over a finite candidate set.

use rand::Rng;

use crate::channel::BeamPair;
use crate::numerics::{std_normal_cdf, std_normal_pdf};
use crate::surrogates::Surrogate;

/// Closed-form `E[max(0, f(z) - f_best)]` under `N(mu, sigma²)`.
pub fn expected_improvement(mu: f64, sigma: f64, f_best: f64) -> f64 {
    debug_assert!(sigma >= 0.0);
    if !(sigma > 0.0) {
        return 0.0;
    }
    let delta = mu - f_best;
    let z = delta / sigma;
    (delta * std_normal_cdf(z) + sigma * std_normal_pdf(z)).max(0.0)
}

/// Incumbent value the improvement is measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcquisitionState {
    pub f_best: f64,
}

/// Winning candidate of one acquisition search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub pair: BeamPair,
    pub ei: f64,
    /// Position in the candidate list.
    pub index: usize,
}

/// `n_random` uniform draws from the domain followed by `fixed` points.
pub fn candidate_set<R: Rng + ?Sized>(
    rng: &mut R,
    n_random: usize,
    fixed: &[BeamPair],
) -> Vec<BeamPair> {
    let mut c: Vec<BeamPair> = (0..n_random).map(|_| BeamPair::random(rng)).collect();
    c.extend_from_slice(fixed);
    c
}

/// Argmax of EI over `candidates`; ties go to the lowest index.
///
/// Panics on an empty candidate list.
pub fn select_candidate<S: Surrogate + ?Sized>(
    surrogate: &S,
    state: AcquisitionState,
    candidates: &[BeamPair],
) -> Selection {
    assert!(!candidates.is_empty(), "no acquisition candidates");
    let bounds: Option<Vec<(f64, f64)>> = candidates
        .iter()
        .map(|&z| surrogate.mean_with_sigma_bound(z))
        .collect();
    match bounds {
        Some(b) => select_pruned(surrogate, state, candidates, &b),
        None => exhaustive_select(surrogate, state, candidates),
    }
}

fn exhaustive_select<S: Surrogate + ?Sized>(
    surrogate: &S,
    state: AcquisitionState,
    candidates: &[BeamPair],
) -> Selection {
    let mut best = Selection {
        pair: candidates[0],
        ei: f64::NEG_INFINITY,
        index: 0,
    };
    for (index, &pair) in candidates.iter().enumerate() {
        let p = surrogate.predict(pair);
        let ei = expected_improvement(p.mu, p.sigma, state.f_best);
        if ei > best.ei {
            best = Selection { pair, ei, index };
        }
    }
    best
}

/// EI is nondecreasing in sigma, so `EI(mu, sigma_max)` bounds each
/// candidate. Candidates are visited by decreasing bound and the scan stops
/// once no remaining bound can reach the incumbent.
fn select_pruned<S: Surrogate + ?Sized>(
    surrogate: &S,
    state: AcquisitionState,
    candidates: &[BeamPair],
    bounds: &[(f64, f64)],
) -> Selection {
    let upper: Vec<f64> = bounds
        .iter()
        .map(|&(mu, s)| expected_improvement(mu, s * (1.0 + 1e-9), state.f_best))
        .collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| upper[b].total_cmp(&upper[a]).then(a.cmp(&b)));

    let mut best: Option<Selection> = None;
    for &i in &order {
        if let Some(b) = best {
            if upper[i] < b.ei {
                break;
            }
        }
        let p = surrogate.predict(candidates[i]);
        let ei = expected_improvement(p.mu, p.sigma, state.f_best);
        let better = match best {
            None => true,
            Some(b) => ei > b.ei || (ei == b.ei && i < b.index),
        };
        if better {
            best = Some(Selection {
                pair: candidates[i],
                ei,
                index: i,
            });
        }
    }
    best.expect("candidate list is nonempty")
}

/// Draws `n_candidates` uniform points, appends `fixed`, and returns the
/// EI maximizer.
pub fn maximize_acquisition<S: Surrogate + ?Sized, R: Rng + ?Sized>(
    surrogate: &S,
    state: AcquisitionState,
    rng: &mut R,
    n_candidates: usize,
    fixed: &[BeamPair],
) -> Selection {
    let candidates = candidate_set(rng, n_candidates, fixed);
    select_candidate(surrogate, state, &candidates)
}
