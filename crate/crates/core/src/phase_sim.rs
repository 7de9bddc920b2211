//! Generative model of the entropy source.
//!
//! The laser phase is a discrete Wiener process sampled every τ_s. The
//! interferometer converts the phase difference over `k = round(τ_l / τ_s)`
//! samples into the quantum noise `Q_m = A·sin(θ_{m+k} − θ_m)`, electronic
//! noise adds to it, and the ADC maps the result to integer codes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AdcSpec, SystemParams};
use crate::rng::RngSeed;

/// Sampled laser phase θ(mτ_s), with θ(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePath {
    pub samples: Vec<f64>,
    pub sample_period_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLabel {
    Quantum,
    Measured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogTrace {
    pub samples: Vec<f64>,
    pub sample_period_s: f64,
    pub label: TraceLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTrace {
    pub codes: Vec<i16>,
    pub adc: AdcSpec,
    pub sample_period_s: f64,
}

impl AnalogTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl QuantizedTrace {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be finite and > 0")))
    }
}

/// Cumulative sum of `n_samples − 1` independent N(0, 2πΔντ_s) increments,
/// prefixed with θ(0) = 0.
pub fn sample_phase_path(
    linewidth_hz: f64,
    sample_period_s: f64,
    n_samples: usize,
    seed: RngSeed,
) -> Result<PhasePath> {
    if !(linewidth_hz.is_finite() && linewidth_hz >= 0.0) {
        return Err(Error::invalid(
            "linewidth_hz",
            format!("{linewidth_hz} must be >= 0"),
        ));
    }
    check_positive("sample_period_s", sample_period_s)?;
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", format!("{n_samples} < 2")));
    }

    let step = (2.0 * std::f64::consts::PI * linewidth_hz * sample_period_s).sqrt();
    let mut stream = seed.stream();
    let mut samples = Vec::with_capacity(n_samples);
    let mut theta = 0.0;
    samples.push(theta);
    for _ in 1..n_samples {
        theta += step * stream.standard_normal();
        samples.push(theta);
    }
    Ok(PhasePath {
        samples,
        sample_period_s,
    })
}

/// Delay in samples, `round(τ_l / τ_s)` with ties away from zero.
pub fn delay_index(delay_s: f64, sample_period_s: f64) -> Result<usize> {
    check_positive("delay_s", delay_s)?;
    check_positive("sample_period_s", sample_period_s)?;
    let k = (delay_s / sample_period_s).round();
    if k < 1.0 {
        return Err(Error::DelayTooSmall {
            delay_s,
            sample_period_s,
        });
    }
    Ok(k as usize)
}

/// Delayed self-interference output `A·sin(θ_{m+k} − θ_m)`.
pub fn quantum_noise(path: &PhasePath, k: usize, amplitude: f64) -> Result<AnalogTrace> {
    if k < 1 {
        return Err(Error::invalid("k", "delay index must be >= 1"));
    }
    check_positive("amplitude", amplitude)?;
    let theta = &path.samples;
    if theta.len() <= k {
        return Err(Error::PathTooShort {
            len: theta.len(),
            k,
        });
    }
    let samples = theta
        .iter()
        .zip(&theta[k..])
        .map(|(early, late)| amplitude * (late - early).sin())
        .collect();
    Ok(AnalogTrace {
        samples,
        sample_period_s: path.sample_period_s,
        label: TraceLabel::Quantum,
    })
}

/// `M = Q + C` with C i.i.d. N(0, σ_ele²).
pub fn add_electronic_noise(
    trace: &AnalogTrace,
    sigma_ele: f64,
    seed: RngSeed,
) -> Result<AnalogTrace> {
    if !(sigma_ele.is_finite() && sigma_ele >= 0.0) {
        return Err(Error::invalid(
            "sigma_ele",
            format!("{sigma_ele} must be >= 0"),
        ));
    }
    let samples = if sigma_ele == 0.0 {
        trace.samples.clone()
    } else {
        let mut stream = seed.stream();
        trace
            .samples
            .iter()
            .map(|q| q + stream.normal(sigma_ele))
            .collect()
    };
    Ok(AnalogTrace {
        samples,
        sample_period_s: trace.sample_period_s,
        label: TraceLabel::Measured,
    })
}

/// Code of a single voltage: `ceil(x/δ − 1/2)` clamped to the ADC range.
pub fn quantize_sample(x: f64, adc: &AdcSpec) -> i16 {
    let raw = (x / adc.delta() - 0.5).ceil();
    raw.clamp(adc.min_code() as f64, adc.max_code() as f64) as i16
}

pub fn quantize(trace: &AnalogTrace, adc: &AdcSpec) -> QuantizedTrace {
    QuantizedTrace {
        codes: trace
            .samples
            .iter()
            .map(|&x| quantize_sample(x, adc))
            .collect(),
        adc: *adc,
        sample_period_s: trace.sample_period_s,
    }
}

/// Keeps every `stride`-th code, modelling a digitizer clocked at
/// `1 / (stride · τ_s)`.
pub fn decimate(trace: &QuantizedTrace, stride: usize) -> Result<QuantizedTrace> {
    if stride == 0 {
        return Err(Error::invalid("stride", "must be >= 1"));
    }
    Ok(QuantizedTrace {
        codes: trace.codes.iter().step_by(stride).copied().collect(),
        adc: trace.adc,
        sample_period_s: trace.sample_period_s * stride as f64,
    })
}

/// All traces of one simulated run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub delay_index: usize,
    pub quantum: AnalogTrace,
    pub measured: AnalogTrace,
    pub codes: QuantizedTrace,
}

/// Sub-stream of the run seed that drives the phase path.
pub const PHASE_STREAM: u64 = 1;
/// Sub-stream of the run seed that drives the electronic noise.
pub const NOISE_STREAM: u64 = 2;

/// Quantum trace only, for stages that never look at M.
pub fn simulate_quantum(
    params: &SystemParams,
    n_samples: usize,
    seed: RngSeed,
) -> Result<AnalogTrace> {
    params.validate()?;
    let k = delay_index(params.delay_s, params.sample_period_s)?;
    let path = sample_phase_path(
        params.linewidth_hz,
        params.sample_period_s,
        n_samples,
        seed.derive(PHASE_STREAM),
    )?;
    quantum_noise(&path, k, params.amplitude)
}

/// Full generative pipeline. Codes are taken from the quantum trace Q.
pub fn simulate(params: &SystemParams, n_samples: usize, seed: RngSeed) -> Result<Simulation> {
    let quantum = simulate_quantum(params, n_samples, seed)?;
    let measured = add_electronic_noise(&quantum, params.sigma_ele, seed.derive(NOISE_STREAM))?;
    let codes = quantize(&quantum, &params.adc);
    Ok(Simulation {
        delay_index: delay_index(params.delay_s, params.sample_period_s)?,
        quantum,
        measured,
        codes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn zero_linewidth_gives_flat_path() {
        let p = sample_phase_path(0.0, 1e-10, 100, RngSeed(3)).unwrap();
        assert!(p.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn increments_have_wiener_variance() {
        let n = 1 << 20;
        let p = sample_phase_path(9.5e6, 1e-10, n, RngSeed(1)).unwrap();
        assert_eq!(p.samples[0], 0.0);
        let inc: Vec<f64> = p.samples.windows(2).map(|w| w[1] - w[0]).collect();
        let (_, var) = mean_var(&inc);
        let expected = 2.0 * std::f64::consts::PI * 9.5e6 * 1e-10;
        assert!((expected - 5.969e-3).abs() < 1e-6);
        let se = expected * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - expected).abs() < 5.0 * se, "{var} vs {expected}");

        // Excess kurtosis of Gaussian increments is 0 with SE ≈ √(24/n).
        let (mean, _) = mean_var(&inc);
        let m4 = inc.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / inc.len() as f64;
        let kurt = m4 / (var * var) - 3.0;
        assert!(
            kurt.abs() < 5.0 * (24.0 / inc.len() as f64).sqrt(),
            "kurtosis {kurt}"
        );
    }

    #[test]
    fn path_is_deterministic() {
        let a = sample_phase_path(9.5e6, 1e-10, 1 << 20, RngSeed(1)).unwrap();
        let b = sample_phase_path(9.5e6, 1e-10, 1 << 20, RngSeed(1)).unwrap();
        assert_eq!(a, b);
        let c = sample_phase_path(9.5e6, 1e-10, 1 << 10, RngSeed(2)).unwrap();
        assert_ne!(a.samples[..1 << 10], c.samples[..]);
    }

    #[test]
    fn path_rejects_bad_inputs() {
        assert!(sample_phase_path(1e6, 1e-10, 1, RngSeed(0)).is_err());
        assert!(sample_phase_path(-1.0, 1e-10, 10, RngSeed(0)).is_err());
        assert!(sample_phase_path(1e6, 0.0, 10, RngSeed(0)).is_err());
    }

    #[test]
    fn delay_index_rounding() {
        assert_eq!(delay_index(6.5e-9, 1e-10).unwrap(), 65);
        assert_eq!(delay_index(2.5e-9, 1e-10).unwrap(), 25);
        assert_eq!(delay_index(1.5, 1.0).unwrap(), 2);
        assert_eq!(delay_index(0.5, 1.0).unwrap(), 1);
        assert!(matches!(
            delay_index(0.04e-9, 1e-10),
            Err(Error::DelayTooSmall { .. })
        ));
        assert!(delay_index(0.0, 1e-10).is_err());
    }

    #[test]
    fn quantum_noise_of_flat_path_is_zero() {
        let p = sample_phase_path(0.0, 1e-10, 100, RngSeed(0)).unwrap();
        let q = quantum_noise(&p, 7, 1.0).unwrap();
        assert_eq!(q.len(), 93);
        assert!(q.samples.iter().all(|&x| x == 0.0));
        assert_eq!(q.label, TraceLabel::Quantum);
    }

    #[test]
    fn quantum_noise_scales_linearly() {
        let p = sample_phase_path(2e7, 1e-10, 4096, RngSeed(5)).unwrap();
        let q1 = quantum_noise(&p, 30, 1.0).unwrap();
        let q2 = quantum_noise(&p, 30, 2.0).unwrap();
        for (a, b) in q1.samples.iter().zip(&q2.samples) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn quantum_noise_needs_long_path() {
        let p = sample_phase_path(1e6, 1e-10, 10, RngSeed(0)).unwrap();
        assert!(matches!(
            quantum_noise(&p, 10, 1.0),
            Err(Error::PathTooShort { len: 10, k: 10 })
        ));
        assert!(quantum_noise(&p, 9, 1.0).is_ok());
    }

    #[test]
    fn quantum_noise_is_bounded() {
        let p = sample_phase_path(5e8, 1e-10, 1 << 16, RngSeed(11)).unwrap();
        let a = 0.75;
        let q = quantum_noise(&p, 40, a).unwrap();
        assert!(q.samples.iter().all(|x| x.abs() <= a));
    }

    #[test]
    fn electronic_noise() {
        let p = sample_phase_path(9.5e6, 1e-10, 1 << 20, RngSeed(1)).unwrap();
        let q = quantum_noise(&p, 65, 1.0).unwrap();

        let same = add_electronic_noise(&q, 0.0, RngSeed(9)).unwrap();
        assert_eq!(same.samples, q.samples);
        assert_eq!(same.label, TraceLabel::Measured);

        let m = add_electronic_noise(&q, 0.01, RngSeed(9)).unwrap();
        let c: Vec<f64> = m
            .samples
            .iter()
            .zip(&q.samples)
            .map(|(m, q)| m - q)
            .collect();
        let (_, var) = mean_var(&c);
        let se = 1e-4 * (2.0 / c.len() as f64).sqrt();
        assert!((var - 1e-4).abs() < 5.0 * se, "{var}");

        let again = add_electronic_noise(&q, 0.01, RngSeed(9)).unwrap();
        assert_eq!(m, again);
        assert!(add_electronic_noise(&q, -0.1, RngSeed(9)).is_err());
    }

    #[test]
    fn quantizer_conventions() {
        let adc = AdcSpec::new(8, 1.0).unwrap();
        let d = adc.delta();
        assert_eq!(quantize_sample(0.0, &adc), 0);
        for i in -127..127 {
            let upper = i as f64 * d + d / 2.0;
            assert_eq!(quantize_sample(upper, &adc), i as i16, "upper edge of {i}");
            assert_eq!(quantize_sample(upper + 1e-12, &adc), (i + 1) as i16);
        }
        assert_eq!(quantize_sample(10.0, &adc), 127);
        assert_eq!(quantize_sample(-10.0, &adc), -128);
        assert_eq!(quantize_sample(-1.0 - d / 2.0, &adc), -128);
    }

    #[test]
    fn decimation_keeps_every_stride() {
        let t = QuantizedTrace {
            codes: (0..10).collect(),
            adc: AdcSpec::default(),
            sample_period_s: 1e-10,
        };
        let d = decimate(&t, 3).unwrap();
        assert_eq!(d.codes, vec![0, 3, 6, 9]);
        assert!((d.sample_period_s - 3e-10).abs() < 1e-24);
        assert!(decimate(&t, 0).is_err());
    }

    #[test]
    fn simulate_bookkeeping() {
        let params = SystemParams::default();
        let sim = simulate(&params, 10_000, RngSeed(1)).unwrap();
        assert_eq!(sim.delay_index, 65);
        assert_eq!(sim.quantum.len(), 10_000 - 65);
        assert_eq!(sim.measured.len(), sim.quantum.len());
        assert_eq!(sim.codes.len(), sim.quantum.len());
        let again = simulate(&params, 10_000, RngSeed(1)).unwrap();
        assert_eq!(sim.measured, again.measured);
    }

    proptest! {
        #[test]
        fn quantize_partitions_line(t in 0.0f64..1.0, bits in 2u8..=12) {
            let adc = AdcSpec::new(bits, 1.0).unwrap();
            let d = adc.delta();
            // Map t onto the unsaturated interval (−R − δ/2, R − δ/2).
            let x = -1.0 - d / 2.0 + t * 2.0 * adc.range;
            prop_assume!(x > -1.0 - d / 2.0);
            let c = quantize_sample(x, &adc);
            let (lo, hi) = adc.bin_edges(c as i32);
            prop_assert!(lo < x && x <= hi + 1e-15);
            let next = quantize_sample(x + d, &adc);
            if (c as i32) < adc.max_code() - 1 && (c as i32) > adc.min_code() {
                prop_assert_eq!(next as i32 - c as i32, 1);
            }
        }
    }
}
