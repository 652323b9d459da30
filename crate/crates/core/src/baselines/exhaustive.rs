use rand::Rng;

use crate::channel::{BeamPair, CodebookPair, GridIndex, Link};
use crate::optimizer::RunTrace;

#[derive(Clone, Debug)]
pub struct ExhaustiveResult {
    pub pair: BeamPair,
    pub index: GridIndex,
    pub measurements: usize,
    pub trace: RunTrace,
}

/// Measures every TX×RX codebook pair once and keeps the noisy argmax.
pub fn exhaustive_search<R: Rng + ?Sized>(
    link: &mut Link<'_>,
    codebooks: &CodebookPair,
    rng: &mut R,
) -> ExhaustiveResult {
    let before = link.measurements();
    let mut trace = RunTrace::new();
    let mut best: Option<(f64, usize)> = None;
    for flat in 0..codebooks.grid_size() {
        let idx = codebooks.index(flat);
        let rss = link.measure_rss_with(
            codebooks.rx.vector(idx.rx),
            codebooks.tx.vector(idx.tx),
            rng,
        );
        trace.push(codebooks.pair(idx), rss);
        if best.is_none_or(|(b, _)| rss > b) {
            best = Some((rss, flat));
        }
    }
    let flat = best.expect("codebooks are nonempty").1;
    let index = codebooks.index(flat);
    ExhaustiveResult {
        pair: codebooks.pair(index),
        index,
        measurements: link.measurements() - before,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{beamforming_gain, draw_channel, ChannelParams, ChannelRealization, Path};
    use crate::numerics::derive_stream;
    use num_complex::Complex64;

    #[test]
    fn finds_planted_grid_path() {
        let params = ChannelParams {
            n_paths: 1,
            sigma_n_sq: 0.0,
            ..ChannelParams::default()
        };
        let cb = CodebookPair::dft(&params);
        let target = GridIndex { tx: 41, rx: 7 };
        let z = cb.pair(target);
        let ch = ChannelRealization::from_paths(
            &params,
            vec![Path {
                alpha: Complex64::new(0.3, -0.8),
                theta: z.theta,
                phi: z.phi,
            }],
        );
        let mut link = Link::new(&ch, &params);
        let r = exhaustive_search(&mut link, &cb, &mut derive_stream(1, &[]));
        assert_eq!(r.index, target);
        assert_eq!(r.measurements, 1024);
        assert_eq!(r.trace.len(), 1024);
    }

    #[test]
    fn noiseless_matches_gain_scan() {
        let params = ChannelParams {
            sigma_n_sq: 0.0,
            ..ChannelParams::default()
        };
        let cb = CodebookPair::dft(&params);
        for seed in 0..5 {
            let ch = draw_channel(&mut derive_stream(seed, &[]), &params);
            let mut link = Link::new(&ch, &params);
            let r = exhaustive_search(&mut link, &cb, &mut derive_stream(seed, &[1]));
            let grid = cb.grid_pairs();
            let oracle = (0..grid.len())
                .max_by(|&a, &b| {
                    beamforming_gain(&ch, grid[a], &params)
                        .total_cmp(&beamforming_gain(&ch, grid[b], &params))
                })
                .unwrap();
            assert_eq!(cb.flat(r.index), oracle);
        }
    }
}
