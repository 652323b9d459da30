//! Narrowband Saleh-Valenzuela channel between two uniform linear arrays,
//! DFT codebooks, and the noisy received-signal-strength probe that every
//! alignment method queries.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{dot_conj, sample_complex_gaussian, ComplexMatrix, ComplexVector};

/// Physical link parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_paths: usize,
    pub d_over_lambda: f64,
    /// Path-gain variance.
    pub sigma_a_sq: f64,
    /// Transmit power.
    pub p_t: f64,
    /// Receiver noise variance.
    pub sigma_n_sq: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            n_tx: 64,
            n_rx: 16,
            n_paths: 5,
            d_over_lambda: 0.5,
            sigma_a_sq: 1.0,
            p_t: 1.0,
            sigma_n_sq: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_tx == 0 || self.n_rx == 0 || self.n_paths == 0 {
            return bad("antenna and path counts must be at least 1");
        }
        if !(self.d_over_lambda > 0.0) {
            return bad("d_over_lambda must be positive");
        }
        if !(self.sigma_a_sq > 0.0) || !(self.p_t > 0.0) {
            return bad("sigma_a_sq and p_t must be positive");
        }
        if !(self.sigma_n_sq >= 0.0) {
            return bad("sigma_n_sq must be non-negative");
        }
        Ok(())
    }

    /// Linear SNR `P_t σ_a² / σ_n²`.
    pub fn snr_linear(&self) -> f64 {
        self.p_t * self.sigma_a_sq / self.sigma_n_sq
    }

    /// Same link with the noise variance set from an SNR in dB.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        Self {
            sigma_n_sq: self.p_t * self.sigma_a_sq / 10f64.powf(snr_db / 10.0),
            ..self.clone()
        }
    }
}

/// Transmit (AoD) and receive (AoA) steering angles in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamPair {
    pub theta: f64,
    pub phi: f64,
}

impl BeamPair {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn in_domain(&self) -> bool {
        (-FRAC_PI_2..=FRAC_PI_2).contains(&self.theta)
            && (-FRAC_PI_2..=FRAC_PI_2).contains(&self.phi)
    }

    /// Uniform draw from `[-π/2, π/2]²`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            theta: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
            phi: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
        }
    }
}

/// ULA response `(1/√n)·exp(j2π(d/λ)k·sin(angle))`, `k = 0..n-1`.
pub fn steering_vector(n: usize, angle: f64, d_over_lambda: f64) -> ComplexVector {
    let scale = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * d_over_lambda * angle.sin();
    (0..n)
        .map(|k| Complex64::from_polar(scale, step * k as f64))
        .collect()
}

/// One multipath component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Path {
    pub alpha: Complex64,
    /// Angle of departure.
    pub theta: f64,
    /// Angle of arrival.
    pub phi: f64,
}

#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub paths: Vec<Path>,
}

impl ChannelRealization {
    /// Assembles `H = √(N_t N_r / L) Σ α_l a_r(φ_l) a_tᴴ(θ_l)`.
    pub fn from_paths(params: &ChannelParams, paths: Vec<Path>) -> Self {
        let (nt, nr) = (params.n_tx, params.n_rx);
        let scale = ((nt * nr) as f64 / paths.len().max(1) as f64).sqrt();
        let mut h = ComplexMatrix::zeros(nr, nt);
        for p in &paths {
            let ar = steering_vector(nr, p.phi, params.d_over_lambda);
            let at = steering_vector(nt, p.theta, params.d_over_lambda);
            let g = p.alpha * scale;
            for i in 0..nr {
                let gi = g * ar[i];
                for j in 0..nt {
                    h[(i, j)] += gi * at[j].conj();
                }
            }
        }
        Self { h, paths }
    }

    /// All-zero channel, useful for noise-only calibration.
    pub fn zero(params: &ChannelParams) -> Self {
        Self {
            h: ComplexMatrix::zeros(params.n_rx, params.n_tx),
            paths: Vec::new(),
        }
    }

    /// Noiseless `uᴴ H v` for given beamformers.
    pub fn response(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        dot_conj(u, &self.h.mul_vec(v))
    }
}

pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, params: &ChannelParams) -> ChannelRealization {
    let gains = sample_complex_gaussian(rng, params.n_paths, params.sigma_a_sq);
    let paths = gains
        .into_iter()
        .map(|alpha| Path {
            alpha,
            theta: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
            phi: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
        })
        .collect();
    ChannelRealization::from_paths(params, paths)
}

/// Steering vectors on the spatial-frequency grid `-1 + 2i/g`.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub n_antennas: usize,
    pub spatial_angles: Vec<f64>,
    /// `n_antennas × g`, one steering vector per column.
    pub columns: ComplexMatrix,
    vectors: Vec<ComplexVector>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.spatial_angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spatial_angles.is_empty()
    }

    /// Physical steering angle of entry `i`.
    pub fn angle(&self, i: usize) -> f64 {
        self.spatial_angles[i].asin()
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }
}

pub fn build_codebook(n: usize, g: usize, d_over_lambda: f64) -> Codebook {
    assert!(g >= 1, "codebook needs at least one entry");
    let spatial_angles: Vec<f64> = (0..g).map(|i| -1.0 + 2.0 * i as f64 / g as f64).collect();
    let vectors: Vec<ComplexVector> = spatial_angles
        .iter()
        .map(|s| steering_vector(n, s.asin(), d_over_lambda))
        .collect();
    let columns = ComplexMatrix::from_fn(n, g, |i, j| vectors[j][i]);
    Codebook {
        n_antennas: n,
        spatial_angles,
        columns,
        vectors,
    }
}

/// Index of a TX/RX codebook pair; flattened as `rx * G_t + tx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub tx: usize,
    pub rx: usize,
}

/// Transmit and receive codebooks used together.
#[derive(Clone, Debug)]
pub struct CodebookPair {
    pub tx: Codebook,
    pub rx: Codebook,
}

impl CodebookPair {
    pub fn new(params: &ChannelParams, g_tx: usize, g_rx: usize) -> Self {
        Self {
            tx: build_codebook(params.n_tx, g_tx, params.d_over_lambda),
            rx: build_codebook(params.n_rx, g_rx, params.d_over_lambda),
        }
    }

    /// Critically sampled DFT codebooks (`G = N` on both sides).
    pub fn dft(params: &ChannelParams) -> Self {
        Self::new(params, params.n_tx, params.n_rx)
    }

    pub fn grid_size(&self) -> usize {
        self.tx.len() * self.rx.len()
    }

    pub fn index(&self, flat: usize) -> GridIndex {
        GridIndex {
            tx: flat % self.tx.len(),
            rx: flat / self.tx.len(),
        }
    }

    pub fn flat(&self, idx: GridIndex) -> usize {
        idx.rx * self.tx.len() + idx.tx
    }

    pub fn pair(&self, idx: GridIndex) -> BeamPair {
        BeamPair::new(self.tx.angle(idx.tx), self.rx.angle(idx.rx))
    }

    /// Every cross-point of the two codebooks, in flat-index order.
    pub fn grid_pairs(&self) -> Vec<BeamPair> {
        (0..self.grid_size())
            .map(|f| self.pair(self.index(f)))
            .collect()
    }
}

/// Measurement access to a fixed channel; counts every probe.
#[derive(Debug)]
pub struct Link<'a> {
    channel: &'a ChannelRealization,
    params: &'a ChannelParams,
    measurements: usize,
}

impl<'a> Link<'a> {
    pub fn new(channel: &'a ChannelRealization, params: &'a ChannelParams) -> Self {
        Self {
            channel,
            params,
            measurements: 0,
        }
    }

    pub fn channel(&self) -> &'a ChannelRealization {
        self.channel
    }

    pub fn params(&self) -> &'a ChannelParams {
        self.params
    }

    pub fn measurements(&self) -> usize {
        self.measurements
    }

    /// One pilot reception `√P_t uᴴHv + uᴴw` with explicit beamformers.
    pub fn receive_with<R: Rng + ?Sized>(
        &mut self,
        u: &[Complex64],
        v: &[Complex64],
        rng: &mut R,
    ) -> Complex64 {
        self.measurements += 1;
        let w = sample_complex_gaussian(rng, self.params.n_rx, self.params.sigma_n_sq);
        self.channel.response(u, v) * self.params.p_t.sqrt() + dot_conj(u, &w)
    }

    pub fn receive<R: Rng + ?Sized>(&mut self, pair: BeamPair, rng: &mut R) -> Complex64 {
        let (u, v) = beamformers(self.params, pair);
        self.receive_with(&u, &v, rng)
    }

    pub fn measure_rss<R: Rng + ?Sized>(&mut self, pair: BeamPair, rng: &mut R) -> f64 {
        self.receive(pair, rng).norm_sqr()
    }

    pub fn measure_rss_with<R: Rng + ?Sized>(
        &mut self,
        u: &[Complex64],
        v: &[Complex64],
        rng: &mut R,
    ) -> f64 {
        self.receive_with(u, v, rng).norm_sqr()
    }
}

/// Receive combiner `u = a_r(φ)` and transmit precoder `v = a_t(θ)`.
pub fn beamformers(params: &ChannelParams, pair: BeamPair) -> (ComplexVector, ComplexVector) {
    (
        steering_vector(params.n_rx, pair.phi, params.d_over_lambda),
        steering_vector(params.n_tx, pair.theta, params.d_over_lambda),
    )
}

/// Single noisy RSS probe; see [`Link`] for a counted session.
pub fn measure_rss<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    pair: BeamPair,
    params: &ChannelParams,
    rng: &mut R,
) -> f64 {
    Link::new(channel, params).measure_rss(pair, rng)
}

/// Noise-free `|uᴴHv|²`.
pub fn beamforming_gain(
    channel: &ChannelRealization,
    pair: BeamPair,
    params: &ChannelParams,
) -> f64 {
    let (u, v) = beamformers(params, pair);
    channel.response(&u, &v).norm_sqr()
}

/// `log2(1 + P_t·gain/σ_n²)` in bits/s/Hz.
pub fn spectral_efficiency(gain: f64, params: &ChannelParams) -> f64 {
    if gain <= 0.0 {
        return 0.0;
    }
    (1.0 + params.p_t * gain / params.sigma_n_sq).log2()
}
