use lpn_qrng::entropy::EntropyMethod;
use lpn_qrng::optimizer::{sweep, SimSettings, SweepGrid, SweepResult};
use lpn_qrng::{RngSeed, SystemParams};

fn scenario(linewidths_hz: Vec<f64>, delays_s: Vec<f64>, master: u64) -> SweepResult {
    let grid = SweepGrid {
        linewidths_hz,
        delays_s,
        base: SystemParams::default(),
        sim: SimSettings {
            master_seed: RngSeed(master),
            ..SimSettings::default()
        },
        entropy_method: EntropyMethod::Analytic,
    };
    sweep(&grid).unwrap()
}

fn delays() -> Vec<f64> {
    [2.5, 4.5, 6.5, 8.5, 10.5, 12.5]
        .iter()
        .map(|d| d * 1e-9)
        .collect()
}

fn rises_then_falls(h: &[f64]) -> bool {
    let peak = h
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    peak > 0
        && peak < h.len() - 1
        && h[..=peak].windows(2).all(|w| w[1] > w[0])
        && h[peak..].windows(2).all(|w| w[1] < w[0])
}

#[test]
fn best_point_is_stable_across_master_seeds() {
    let best: Vec<(f64, f64)> = [1u64, 2, 3]
        .iter()
        .map(|&m| {
            let r = scenario(vec![9.5e6], delays(), m);
            let b = r.best.unwrap();
            (b.linewidth_hz, b.delay_s)
        })
        .collect();
    assert!(best.iter().all(|b| *b == best[0]), "{best:?}");
    assert_eq!(best[0], (9.5e6, 2.5e-9));
}

#[test]
fn rate_falls_and_entropy_peaks_along_delay() {
    let r = scenario(vec![9.5e6], delays(), 4);
    let points: Vec<_> = r.points.iter().map(|e| *e.point().unwrap()).collect();
    assert!(points
        .windows(2)
        .all(|w| w[1].k_bits_per_s < w[0].k_bits_per_s));
    let h: Vec<f64> = points.iter().map(|p| p.h_min_bits).collect();
    assert!(rises_then_falls(&h), "{h:?}");
    let kmax = points
        .iter()
        .map(|p| p.k_bits_per_s)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(r.best.unwrap().k_bits_per_s, kmax);
}

#[test]
fn entropy_peaks_along_linewidth() {
    let linewidths = [1.0, 3.0, 5.0, 7.0, 9.5, 12.0, 14.0, 17.0, 19.5]
        .iter()
        .map(|l| l * 1e6)
        .collect();
    let r = scenario(linewidths, vec![6.5e-9], 5);
    let h: Vec<f64> = r
        .points
        .iter()
        .map(|e| e.point().unwrap().h_min_bits)
        .collect();
    assert!(rises_then_falls(&h), "{h:?}");
}
