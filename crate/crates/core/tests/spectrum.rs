use lpn_qrng::phase_sim::simulate_quantum;
use lpn_qrng::spectral::{
    bandwidth_3db, estimate_psd, PsdEstimate, DEFAULT_NFFT, DEFAULT_OVERLAP, DEFAULT_PLATEAU_BINS,
};
use lpn_qrng::{RngSeed, SystemParams};
use rayon::prelude::*;

const DELAY: f64 = 6.5e-9;

fn quantum_psd(linewidth_hz: f64, delay_s: f64, seed: RngSeed) -> PsdEstimate {
    let params = SystemParams::default().with_design(linewidth_hz, delay_s);
    let q = simulate_quantum(&params, 1 << 22, seed).unwrap();
    estimate_psd(&q, DEFAULT_NFFT, DEFAULT_OVERLAP).unwrap()
}

/// Mean power over five bins centred on `x / τ_l`.
fn level(psd: &PsdEstimate, x: f64) -> f64 {
    let bin = (x / DELAY / psd.bin_width()).round() as usize;
    psd.power[bin - 2..=bin + 2].iter().sum::<f64>() / 5.0
}

#[test]
fn interference_nulls_at_multiples_of_inverse_delay() {
    // 19.5 and 22 MHz both stand for the widest linewidth in the scan.
    for linewidth in [9.5e6, 19.5e6, 22e6] {
        let psd = quantum_psd(linewidth, DELAY, RngSeed(3));
        let null1 = level(&psd, 1.0);
        let null2 = level(&psd, 2.0);
        assert!(
            null1 < 0.5 * level(&psd, 0.8) && null1 < 0.5 * level(&psd, 1.43),
            "Δν = {linewidth}"
        );
        assert!(
            null2 < 0.5 * level(&psd, 1.7) && null2 < 0.5 * level(&psd, 2.46),
            "Δν = {linewidth}"
        );

        let envelope = [0.1, 0.5, 1.43, 2.46].map(|x| level(&psd, x));
        assert!(
            envelope.windows(2).all(|w| w[1] < w[0]),
            "Δν = {linewidth}: {envelope:?}"
        );
    }
}

#[test]
fn bandwidth_agrees_across_disjoint_seeds() {
    let designs = [
        (9.5e6, 2.5e-9),
        (9.5e6, 6.5e-9),
        (9.5e6, 12.5e-9),
        (19.5e6, 6.5e-9),
    ];
    designs.par_iter().enumerate().for_each(|(i, &(l, d))| {
        let [a, b] = [RngSeed(100 + i as u64), RngSeed(200 + i as u64)].map(|s| {
            bandwidth_3db(&quantum_psd(l, d, s), DEFAULT_PLATEAU_BINS)
                .unwrap()
                .b_es_hz
        });
        assert!((a - b).abs() <= 0.05 * a.min(b), "({l}, {d}): {a} vs {b}");
    });
}

#[test]
fn parseval_holds_for_quantum_trace() {
    let params = SystemParams::default().with_design(9.5e6, DELAY);
    let q = simulate_quantum(&params, 1 << 20, RngSeed(5)).unwrap();
    let n = q.samples.len() as f64;
    let mean = q.samples.iter().sum::<f64>() / n;
    let var = q.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let psd = estimate_psd(&q, DEFAULT_NFFT, DEFAULT_OVERLAP).unwrap();
    assert!((psd.total_power() - var).abs() <= 0.02 * var);
}
