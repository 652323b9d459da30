//! Compressed-sensing alignment: random codebook probes, a virtual-channel
//! sensing matrix, and orthogonal matching pursuit.
//!
//! With `H = A_R X A_Tᴴ`, a probe with combiner `u` and precoder `v` observes
//! `√P_t (uᴴA_R) X (A_Tᴴv)`, which is linear in `vec(X)`. The entry of
//! `vec(X)` for RX beam `r` and TX beam `t` sits at column `r·G_t + t`.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use crate::channel::{BeamPair, CodebookPair, GridIndex, Link};
use crate::error::{Error, Result};
use crate::numerics::{dot_conj, hermitian_solve, ComplexMatrix, ComplexVector};
use crate::optimizer::RunTrace;

const ZERO_COLUMN_RTOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SensingSystem {
    /// `budget × (G_r·G_t)`.
    pub matrix: ComplexMatrix,
    pub observations: ComplexVector,
    pub g_rx: usize,
    pub g_tx: usize,
}

impl SensingSystem {
    /// Probes `pairs` (codebook indices) through `link`.
    pub fn measure<R: Rng + ?Sized>(
        link: &mut Link<'_>,
        codebooks: &CodebookPair,
        pairs: &[GridIndex],
        rng: &mut R,
    ) -> Self {
        let (g_rx, g_tx) = (codebooks.rx.len(), codebooks.tx.len());
        let amp = link.params().p_t.sqrt();
        let mut matrix = ComplexMatrix::zeros(pairs.len(), g_rx * g_tx);
        let mut observations = Vec::with_capacity(pairs.len());
        for (row, idx) in pairs.iter().enumerate() {
            let u = codebooks.rx.vector(idx.rx);
            let v = codebooks.tx.vector(idx.tx);
            // uᴴA_R and A_Tᴴv
            let rx_proj: Vec<Complex64> = (0..g_rx)
                .map(|r| dot_conj(u, codebooks.rx.vector(r)))
                .collect();
            let tx_proj: Vec<Complex64> = (0..g_tx)
                .map(|t| dot_conj(codebooks.tx.vector(t), v))
                .collect();
            for (r, a) in rx_proj.iter().enumerate() {
                for (t, b) in tx_proj.iter().enumerate() {
                    matrix[(row, r * g_tx + t)] = a * b * amp;
                }
            }
            observations.push(link.receive_with(u, v, rng));
        }
        Self {
            matrix,
            observations,
            g_rx,
            g_tx,
        }
    }

    pub fn grid_index(&self, column: usize) -> GridIndex {
        GridIndex {
            tx: column % self.g_tx,
            rx: column / self.g_tx,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmpSolution {
    /// Selected columns in selection order.
    pub support: Vec<usize>,
    /// Least-squares coefficients on `support`.
    pub coefficients: Vec<Complex64>,
    /// Residual norm before the first and after every iteration.
    pub residual_norms: Vec<f64>,
}

impl OmpSolution {
    /// Column carrying the largest-magnitude coefficient.
    pub fn strongest(&self) -> Option<usize> {
        self.support
            .iter()
            .zip(&self.coefficients)
            .fold(None, |best: Option<(usize, f64)>, (&c, x)| match best {
                Some((_, m)) if m >= x.norm() => best,
                _ => Some((c, x.norm())),
            })
            .map(|(c, _)| c)
    }
}

/// Greedy sparse recovery of `y ≈ M x` with at most `sparsity` nonzeros.
///
/// Stops early once the residual is exactly orthogonal to every unused
/// column. Columns whose norm is round-off relative to the largest one are
/// treated as zero and never selected.
pub fn omp_solve(matrix: &ComplexMatrix, y: &[Complex64], sparsity: usize) -> Result<OmpSolution> {
    let (m, n) = (matrix.rows(), matrix.cols());
    assert_eq!(y.len(), m);
    let columns: Vec<ComplexVector> = (0..n).map(|j| matrix.column(j)).collect();
    let mut col_norms: Vec<f64> = columns.iter().map(|c| crate::numerics::norm(c)).collect();
    let floor = ZERO_COLUMN_RTOL * col_norms.iter().copied().fold(0.0, f64::max);
    for c in col_norms.iter_mut() {
        if *c <= floor {
            *c = 0.0;
        }
    }

    let mut residual = y.to_vec();
    let mut support: Vec<usize> = Vec::new();
    let mut coefficients: Vec<Complex64> = Vec::new();
    let mut residual_norms = vec![crate::numerics::norm(&residual)];

    while support.len() < sparsity {
        let mut pick: Option<(usize, f64)> = None;
        for j in 0..n {
            if col_norms[j] == 0.0 || support.contains(&j) {
                continue;
            }
            let corr = dot_conj(&columns[j], &residual).norm() / col_norms[j];
            if corr > pick.map_or(0.0, |p| p.1) {
                pick = Some((j, corr));
            }
        }
        let Some((j, _)) = pick else { break };
        support.push(j);
        coefficients = least_squares(&columns, &support, y)?;
        residual = y.to_vec();
        for (&c, x) in support.iter().zip(&coefficients) {
            for (r, a) in residual.iter_mut().zip(&columns[c]) {
                *r -= a * x;
            }
        }
        residual_norms.push(crate::numerics::norm(&residual));
    }
    Ok(OmpSolution {
        support,
        coefficients,
        residual_norms,
    })
}

fn least_squares(
    columns: &[ComplexVector],
    support: &[usize],
    y: &[Complex64],
) -> Result<Vec<Complex64>> {
    let k = support.len();
    let gram = ComplexMatrix::from_fn(k, k, |a, b| {
        dot_conj(&columns[support[a]], &columns[support[b]])
    });
    let rhs: Vec<Complex64> = support.iter().map(|&c| dot_conj(&columns[c], y)).collect();
    match hermitian_solve(&gram, &rhs) {
        Ok(x) => Ok(x),
        Err(Error::NotPositiveDefinite { .. }) => {
            let trace: f64 = (0..k).map(|i| gram[(i, i)].re).sum();
            let mut g = gram.clone();
            for i in 0..k {
                g[(i, i)] += Complex64::new(1e-12 * trace, 0.0);
            }
            hermitian_solve(&g, &rhs)
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug)]
pub struct OmpResult {
    pub pair: BeamPair,
    pub index: GridIndex,
    pub solution: OmpSolution,
    pub trace: RunTrace,
}

/// Probes `budget` distinct random codebook pairs and aligns to the
/// strongest recovered virtual-channel coefficient.
pub fn omp_align<R: Rng + ?Sized>(
    link: &mut Link<'_>,
    codebooks: &CodebookPair,
    budget: usize,
    sparsity: usize,
    rng: &mut R,
) -> Result<OmpResult> {
    if sparsity == 0 || budget < sparsity {
        return Err(Error::BudgetTooSmall { budget, sparsity });
    }
    let grid = codebooks.grid_size();
    if budget > grid {
        return Err(Error::BudgetExceedsGrid { budget, grid });
    }
    let pairs: Vec<GridIndex> = sample(rng, grid, budget)
        .into_iter()
        .map(|f| codebooks.index(f))
        .collect();
    let system = SensingSystem::measure(link, codebooks, &pairs, rng);
    let mut trace = RunTrace::new();
    for (idx, y) in pairs.iter().zip(&system.observations) {
        trace.push(codebooks.pair(*idx), y.norm_sqr());
    }
    let solution = omp_solve(&system.matrix, &system.observations, sparsity)?;
    // an all-zero observation vector recovers nothing; fall back to the first probe
    let index = solution
        .strongest()
        .map_or(pairs[0], |c| system.grid_index(c));
    Ok(OmpResult {
        pair: codebooks.pair(index),
        index,
        solution,
        trace,
    })
}
