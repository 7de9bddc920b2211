//! Welch power-spectrum estimate and 3-dB bandwidth extraction.

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_sim::AnalogTrace;

pub const DEFAULT_NFFT: usize = 8192;
pub const DEFAULT_OVERLAP: f64 = 0.5;
pub const DEFAULT_PLATEAU_BINS: usize = 16;
/// Width of the centered moving average applied before threshold search.
pub const SMOOTHING_BINS: usize = 15;
/// Bins after the first sub-threshold bin that must also stay below it.
pub const PERSISTENCE_BINS: usize = 3;

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    /// V²/Hz per bin.
    pub power: Vec<f64>,
    pub n_segments: usize,
    pub nfft: usize,
}

impl PsdEstimate {
    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() < 2 {
            0.0
        } else {
            self.freqs[1] - self.freqs[0]
        }
    }

    pub fn nyquist(&self) -> f64 {
        self.freqs.last().copied().unwrap_or(0.0)
    }

    /// Integrated power, `Σ P·Δf`.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_width()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthEstimate {
    pub b_es_hz: f64,
    pub reference_level: f64,
    /// No 3-dB crossing below Nyquist; `b_es_hz` is then Nyquist.
    pub saturated: bool,
}

/// Periodic Hann window.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Averaged periodogram of the mean-removed trace with a Hann window,
/// normalized by window power and scaled to a one-sided density.
pub fn estimate_psd(
    trace: &AnalogTrace,
    nfft: usize,
    overlap_fraction: f64,
) -> Result<PsdEstimate> {
    if nfft < 2 || !nfft.is_power_of_two() {
        return Err(Error::invalid(
            "nfft",
            format!("{nfft} is not a power of two >= 2"),
        ));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::invalid(
            "overlap_fraction",
            format!("{overlap_fraction} not in [0, 1)"),
        ));
    }
    let x = &trace.samples;
    if x.len() < 2 * nfft {
        return Err(Error::TraceTooShort {
            len: x.len(),
            required: 2 * nfft,
        });
    }

    let fs = 1.0 / trace.sample_period_s;
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let window = hann(nfft);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let step = (nfft - (overlap_fraction * nfft as f64).round() as usize).max(1);
    let n_bins = nfft / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut acc = vec![0.0; n_bins];
    let mut n_segments = 0;

    let mut start = 0;
    while start + nfft <= x.len() {
        for ((b, &s), &w) in buf.iter_mut().zip(&x[start..start + nfft]).zip(&window) {
            *b = Complex64::new((s - mean) * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        n_segments += 1;
        start += step;
    }

    let scale = 1.0 / (fs * window_power * n_segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            // DC and Nyquist have no mirror image.
            let one_sided = if i == 0 || i == nfft / 2 { 1.0 } else { 2.0 };
            a * scale * one_sided
        })
        .collect();
    let df = fs / nfft as f64;
    let freqs = (0..n_bins).map(|i| i as f64 * df).collect();

    Ok(PsdEstimate {
        freqs,
        power,
        n_segments,
        nfft,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn smooth(power: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..power.len())
        .map(|i| {
            if i == 0 {
                return power[0];
            }
            let lo = i.saturating_sub(half).max(1);
            let hi = (i + half).min(power.len() - 1);
            let window = &power[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

/// 3-dB cutoff of a low-pass spectrum.
///
/// The reference level is the median of bins `1..=plateau_bins`. The cutoff
/// is the first bin whose smoothed power drops below half the reference and
/// stays below for [`PERSISTENCE_BINS`] more bins, linearly interpolated
/// against the preceding bin.
pub fn bandwidth_3db(psd: &PsdEstimate, plateau_bins: usize) -> Result<BandwidthEstimate> {
    let n = psd.power.len();
    if n < 2 || psd.freqs.len() != n {
        return Err(Error::EmptyPsd);
    }
    if plateau_bins < 1 || plateau_bins >= n {
        return Err(Error::invalid(
            "plateau_bins",
            format!("{plateau_bins} not in [1, {})", n),
        ));
    }
    let reference_level = median(&mut psd.power[1..=plateau_bins].to_vec());
    let half = reference_level / 2.0;
    let smoothed = smooth(&psd.power, SMOOTHING_BINS);
    let nyquist = psd.nyquist();

    let crossing = (1..n).find(|&j| {
        j + PERSISTENCE_BINS < n && smoothed[j..=j + PERSISTENCE_BINS].iter().all(|&p| p < half)
    });

    Ok(match crossing {
        Some(j) => {
            let (f0, f1) = (psd.freqs[j - 1], psd.freqs[j]);
            let (p0, p1) = (smoothed[j - 1], smoothed[j]);
            let f = if j > 1 && p0 > p1 {
                f0 + (p0 - half) / (p0 - p1) * (f1 - f0)
            } else {
                f1
            };
            BandwidthEstimate {
                b_es_hz: f.min(nyquist),
                reference_level,
                saturated: false,
            }
        }
        None => BandwidthEstimate {
            b_es_hz: nyquist,
            reference_level,
            saturated: true,
        },
    })
}
