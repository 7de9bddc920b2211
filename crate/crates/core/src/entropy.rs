//! Quantum min-entropy of the quantized interference signal.
//!
//! Under the model `Q = A·sin(Δθ)` with `Δθ ~ N(0, σ²)`, the probability of an
//! ADC bin is the Gaussian mass of the phase intervals that `sin` maps into
//! the bin, summed over all `2π` periods. The min-entropy is set by the larger
//! of the center-bin probability `P_C` and the topmost-occupied-bin
//! probability `P_R`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::params::AdcSpec;
use crate::phase_sim::{quantize_sample, QuantizedTrace};

const TWO_PI: f64 = 2.0 * PI;
/// Periods farther than this many standard deviations (plus π) are dropped.
const TRUNCATION_SIGMAS: f64 = 8.0;

/// σ² of the phase difference across the interferometer (rad²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoiseVariance {
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMethod {
    #[default]
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub p_c: f64,
    pub p_r: f64,
    pub p_max: f64,
    /// Bits per sample.
    pub h_min: f64,
    /// Phase-noise variance the report derives from; unknown for histograms.
    pub sigma2: Option<f64>,
    pub method: EntropyMethod,
}

impl EntropyReport {
    fn new(p_c: f64, p_r: f64, p_max: f64, sigma2: Option<f64>, method: EntropyMethod) -> Self {
        // Clamp −0.0 from log2(1).
        let h_min = (-p_max.log2()).max(0.0);
        EntropyReport {
            p_c,
            p_r,
            p_max,
            h_min,
            sigma2,
            method,
        }
    }

    /// Zero-variance limit: every sample falls in the center bin.
    pub fn degenerate() -> Self {
        EntropyReport::new(1.0, 0.0, 1.0, Some(0.0), EntropyMethod::Analytic)
    }
}

/// σ² = 2π·Δν·τ_l.
pub fn phase_variance(linewidth_hz: f64, delay_s: f64) -> PhaseNoiseVariance {
    PhaseNoiseVariance {
        sigma2: TWO_PI * linewidth_hz * delay_s,
    }
}

/// P{a < X ≤ b} for X ~ N(0, σ²), evaluated on the tail side to keep
/// precision for intervals far from the origin.
fn normal_mass(a: f64, b: f64, sigma: f64) -> f64 {
    let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
    let (za, zb) = (a * scale, b * scale);
    if za >= 0.0 {
        0.5 * (erfc(za) - erfc(zb))
    } else if zb <= 0.0 {
        0.5 * (erfc(-zb) - erfc(-za))
    } else {
        0.5 * (erf(zb) - erf(za))
    }
}

/// Gaussian mass of `(a + 2kπ, b + 2kπ]` summed over every period that
/// reaches inside `±(8σ + π)`.
fn wrapped_mass(a: f64, b: f64, sigma: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let bound = TRUNCATION_SIGMAS * sigma + PI;
    let k_min = ((-bound - b) / TWO_PI).ceil() as i64;
    let k_max = ((bound - a) / TWO_PI).floor() as i64;
    (k_min..=k_max)
        .map(|k| {
            let shift = k as f64 * TWO_PI;
            normal_mass(a + shift, b + shift, sigma)
        })
        .sum()
}

fn clamped_asin(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).asin()
}

fn check_model(sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<f64> {
    adc.validate()?;
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::NonPositiveVariance(sigma2));
    }
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::invalid(
            "amplitude",
            format!("{amplitude} must be > 0"),
        ));
    }
    let limit = adc.range - adc.delta() / 2.0;
    if amplitude > limit * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "amplitude",
            format!("{amplitude} exceeds the unclipped limit R − δ/2 = {limit}"),
        ));
    }
    Ok(sigma2.sqrt())
}

/// Probability that the quantum signal falls in ADC bin `code`.
pub fn bin_probability(code: i32, sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<f64> {
    let sigma = check_model(sigma2, amplitude, adc)?;
    if !adc.contains_code(code) {
        return Err(Error::InvalidBin {
            code,
            bits: adc.bits,
        });
    }
    let (lo, hi) = adc.bin_edges(code);
    let (lo, hi) = (lo.max(-amplitude), hi.min(amplitude));
    if hi <= lo {
        return Ok(0.0);
    }
    let a = clamped_asin(lo / amplitude);
    let b = clamped_asin(hi / amplitude);
    // sin maps (a, b] on the rising branch and [π − b, π − a) on the falling one.
    Ok(wrapped_mass(a, b, sigma) + wrapped_mass(PI - b, PI - a, sigma))
}

/// Analytic probabilities of every code, lowest code first.
pub fn bin_probabilities(sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<Vec<f64>> {
    (adc.min_code()..=adc.max_code())
        .map(|c| bin_probability(c, sigma2, amplitude, adc))
        .collect()
}

/// Center-bin probability from the three phase windows around 0 and ±π.
pub fn p_center(sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<f64> {
    let sigma = check_model(sigma2, amplitude, adc)?;
    let a = clamped_asin(adc.delta() / (2.0 * amplitude));
    Ok(wrapped_mass(-PI, -PI + a, sigma)
        + wrapped_mass(-a, a, sigma)
        + wrapped_mass(PI - a, PI, sigma))
}

/// Code of the highest bin the signal can reach, i.e. the bin holding `A`.
pub fn topmost_code(amplitude: f64, adc: &AdcSpec) -> i32 {
    quantize_sample(amplitude, adc) as i32
}

/// Probability of the topmost occupied bin, `P{Q ∈ (χ − δ/2, A]}`.
pub fn p_boundary(sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<f64> {
    let sigma = check_model(sigma2, amplitude, adc)?;
    let chi = topmost_code(amplitude, adc) as f64 * adc.delta();
    let b = clamped_asin((chi - adc.delta() / 2.0) / amplitude);
    Ok(wrapped_mass(b, PI - b, sigma))
}

pub fn analytic_min_entropy(sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<EntropyReport> {
    let p_c = p_center(sigma2, amplitude, adc)?;
    let p_r = p_boundary(sigma2, amplitude, adc)?;
    Ok(EntropyReport::new(
        p_c,
        p_r,
        p_c.max(p_r),
        Some(sigma2),
        EntropyMethod::Analytic,
    ))
}

/// Counts of every ADC code in a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeHistogram {
    pub adc: AdcSpec,
    /// Indexed by `code − min_code`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CodeHistogram {
    pub fn from_trace(qt: &QuantizedTrace) -> Self {
        let adc = qt.adc;
        let mut counts = vec![0u64; adc.n_codes()];
        let offset = adc.min_code();
        for &c in &qt.codes {
            counts[(c as i32 - offset) as usize] += 1;
        }
        CodeHistogram {
            adc,
            counts,
            total: qt.codes.len() as u64,
        }
    }

    pub fn count(&self, code: i32) -> u64 {
        if self.adc.contains_code(code) {
            self.counts[(code - self.adc.min_code()) as usize]
        } else {
            0
        }
    }

    pub fn frequency(&self, code: i32) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(code) as f64 / self.total as f64
        }
    }

    /// `(code, count, frequency)` rows, lowest code first.
    pub fn rows(&self) -> impl Iterator<Item = (i32, u64, f64)> + '_ {
        (self.adc.min_code()..=self.adc.max_code())
            .map(move |c| (c, self.count(c), self.frequency(c)))
    }

    pub fn max_occupied(&self) -> Option<i32> {
        self.rows().filter(|r| r.1 > 0).map(|r| r.0).last()
    }
}

/// Plug-in estimate `−log2(max frequency)`.
pub fn empirical_min_entropy(qt: &QuantizedTrace) -> Result<EntropyReport> {
    if qt.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let hist = CodeHistogram::from_trace(qt);
    let top = hist.max_occupied().unwrap_or(0);
    let max_count = hist.counts.iter().copied().max().unwrap_or(0);
    Ok(EntropyReport::new(
        hist.frequency(0),
        hist.frequency(top),
        max_count as f64 / hist.total as f64,
        None,
        EntropyMethod::Empirical,
    ))
}

/// Variance of `A·sin(Δθ)`: `½A²(1 − e^(−2σ²))`.
pub fn forward_variance(sigma2: f64, amplitude: f64) -> f64 {
    -0.5 * amplitude * amplitude * (-2.0 * sigma2).exp_m1()
}

/// Phase variance from a quantum-signal variance: `−½ ln(1 − 2σ_Q²/A²)`.
pub fn invert_variance(sigma_q2: f64, amplitude: f64) -> Result<PhaseNoiseVariance> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::invalid(
            "amplitude",
            format!("{amplitude} must be > 0"),
        ));
    }
    let limit = 0.5 * amplitude * amplitude;
    if !(sigma_q2 >= 0.0 && sigma_q2 < limit) {
        return Err(Error::VarianceOutOfRange { sigma_q2, limit });
    }
    Ok(PhaseNoiseVariance {
        sigma2: -0.5 * (-sigma_q2 / limit).ln_1p(),
    })
}

/// `σ_Q² = σ_M² − σ_C²` for independent quantum and classical noise.
pub fn quantum_variance_from_measurement(sigma_m2: f64, sigma_c2: f64) -> Result<f64> {
    if sigma_c2.is_nan() || sigma_c2 < 0.0 {
        return Err(Error::invalid(
            "sigma_c2",
            format!("{sigma_c2} must be >= 0"),
        ));
    }
    if sigma_c2 > sigma_m2 {
        return Err(Error::ClassicalExceedsMeasured {
            measured: sigma_m2,
            classical: sigma_c2,
        });
    }
    Ok(sigma_m2 - sigma_c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn adc8() -> AdcSpec {
        AdcSpec::new(8, 1.0).unwrap()
    }

    #[test]
    fn phase_variance_values() {
        assert!((phase_variance(9.5e6, 6.5e-9).sigma2 - 0.38798).abs() < 1e-5);
        assert!((phase_variance(9.5e6, 2.5e-9).sigma2 - 0.14923).abs() < 1e-5);
        assert_eq!(phase_variance(0.0, 1.0).sigma2, 0.0);
    }

    #[test]
    fn probabilities_normalize() {
        let adc = adc8();
        let a = adc.default_amplitude();
        for s2 in [0.05, 0.4, 3.0] {
            let total: f64 = bin_probabilities(s2, a, &adc).unwrap().iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "σ²={s2}: {total}");
        }
    }

    #[test]
    fn interior_bins_are_symmetric() {
        let adc = adc8();
        let a = adc.default_amplitude();
        for s2 in [0.05, 0.4, 3.0] {
            for i in 1..=127 {
                let p = bin_probability(i, s2, a, &adc).unwrap();
                let q = bin_probability(-i, s2, a, &adc).unwrap();
                assert!((p - q).abs() < 1e-12, "σ²={s2} i={i}: {p} {q}");
            }
        }
    }

    #[test]
    fn center_routes_agree() {
        let adc = adc8();
        for a in [adc.default_amplitude(), adc.range - adc.delta(), 0.3] {
            for s2 in [1e-3, 0.15, 0.388, 2.0, 100.0] {
                let general = bin_probability(0, s2, a, &adc).unwrap();
                let three = p_center(s2, a, &adc).unwrap();
                assert!((general - three).abs() < 1e-14, "{a} {s2}");
                let top = topmost_code(a, &adc);
                let general = bin_probability(top, s2, a, &adc).unwrap();
                let boundary = p_boundary(s2, a, &adc).unwrap();
                assert!((general - boundary).abs() < 1e-14, "{a} {s2}");
            }
        }
    }

    #[test]
    fn arcsine_limits() {
        let adc = adc8();
        let a = adc.range - adc.delta();
        let d = adc.delta();
        let pc = p_center(100.0, a, &adc).unwrap();
        let oracle = 2.0 / PI * (d / (2.0 * a)).asin();
        assert!((oracle - 2.51e-3).abs() < 5e-6);
        assert!((pc - oracle).abs() < 1e-3);

        let chi = 127.0 * d;
        let pr = p_boundary(100.0, a, &adc).unwrap();
        let oracle = 0.5 - ((chi - d / 2.0) / a).asin() / PI;
        assert!((oracle - 2.82e-2).abs() < 1e-4, "{oracle}");
        assert!((pr - oracle).abs() < 1e-3);
    }

    #[test]
    fn small_variance_limits() {
        let adc = adc8();
        let a = adc.default_amplitude();
        let r = analytic_min_entropy(1e-9, a, &adc).unwrap();
        assert!((r.p_c - 1.0).abs() < 1e-9);
        assert!(r.p_r < 1e-12);
        assert!(r.h_min < 1e-8);
        assert_eq!(r.method, EntropyMethod::Analytic);
    }

    #[test]
    fn model_preconditions() {
        let adc = adc8();
        assert!(matches!(
            bin_probability(0, 0.0, 0.5, &adc),
            Err(Error::NonPositiveVariance(_))
        ));
        assert!(matches!(
            bin_probability(128, 0.1, 0.5, &adc),
            Err(Error::InvalidBin { .. })
        ));
        assert!(bin_probability(0, 0.1, 0.999, &adc).is_err());
        assert!(bin_probability(0, 0.1, 1.0 - adc.delta() / 2.0, &adc).is_ok());
    }

    #[test]
    fn topmost_code_at_bin_edge() {
        let adc = adc8();
        let d = adc.delta();
        assert_eq!(topmost_code(84.5 * d, &adc), 84);
        assert_eq!(topmost_code(1.0 - d / 2.0, &adc), 127);
        assert_eq!(topmost_code(2.0 / 3.0, &adc), 85);
    }

    #[test]
    fn empirical_basics() {
        let adc = adc8();
        let constant = QuantizedTrace {
            codes: vec![5; 1000],
            adc,
            sample_period_s: 1e-10,
        };
        let r = empirical_min_entropy(&constant).unwrap();
        assert_eq!(r.h_min, 0.0);
        assert_eq!(r.p_r, 1.0);
        assert_eq!(r.p_c, 0.0);

        let uniform = QuantizedTrace {
            codes: (0..1 << 22).map(|i| ((i % 256) - 128) as i16).collect(),
            adc,
            sample_period_s: 1e-10,
        };
        let r = empirical_min_entropy(&uniform).unwrap();
        assert!((r.h_min - 8.0).abs() < 0.05);

        let empty = QuantizedTrace {
            codes: vec![],
            adc,
            sample_period_s: 1e-10,
        };
        assert!(matches!(
            empirical_min_entropy(&empty),
            Err(Error::EmptyTrace)
        ));
    }

    #[test]
    fn variance_relations() {
        assert!((forward_variance(0.5, 1.0) - 0.316060).abs() < 5e-7);
        assert_eq!(forward_variance(0.0, 2.0), 0.0);
        assert!((forward_variance(1e3, 2.0) - 2.0).abs() < 1e-15);

        assert!((invert_variance(0.316060, 1.0).unwrap().sigma2 - 0.5).abs() < 1e-6);
        assert_eq!(invert_variance(0.0, 3.0).unwrap().sigma2, 0.0);
        assert!(matches!(
            invert_variance(0.5, 1.0),
            Err(Error::VarianceOutOfRange { .. })
        ));

        assert!((quantum_variance_from_measurement(0.5, 0.1).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(quantum_variance_from_measurement(0.3, 0.3).unwrap(), 0.0);
        assert!(matches!(
            quantum_variance_from_measurement(0.1, 0.2),
            Err(Error::ClassicalExceedsMeasured { .. })
        ));
    }

    #[test]
    fn scale_invariance() {
        let adc = adc8();
        let a = adc.default_amplitude();
        let base = analytic_min_entropy(0.388, a, &adc).unwrap().h_min;
        for s in [2.0, 0.5] {
            let scaled = AdcSpec::new(8, adc.range * s).unwrap();
            let h = analytic_min_entropy(0.388, a * s, &scaled).unwrap().h_min;
            assert_eq!(h, base);
        }
    }

    proptest! {
        #[test]
        fn variance_round_trip(s2 in 1e-4f64..5.0, a in prop::sample::select(vec![0.5, 1.0, 2.0])) {
            let back = invert_variance(forward_variance(s2, a), a).unwrap().sigma2;
            prop_assert!((back - s2).abs() <= 1e-12 * s2.max(1.0), "{} -> {}", s2, back);
        }

        #[test]
        fn normalization_over_variance(log_s2 in -2.0f64..2.0, bits in prop::sample::select(vec![6u8, 8, 10])) {
            let adc = AdcSpec::new(bits, 1.0).unwrap();
            let s2 = 10f64.powf(log_s2);
            let total: f64 = bin_probabilities(s2, adc.default_amplitude(), &adc).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
