use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digitizer description: `bits` of resolution over a range of `±range`.
///
/// The bin width is `δ = R / 2^(n−1)` and code `i` collects the half-open
/// interval `(iδ − δ/2, iδ + δ/2]`, for `i ∈ [−2^(n−1), 2^(n−1) − 1]`.
/// Values outside `[−R − δ/2, R − δ/2]` saturate to the end codes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcSpec {
    pub bits: u8,
    pub range: f64,
}

impl AdcSpec {
    pub fn new(bits: u8, range: f64) -> Result<Self> {
        let adc = AdcSpec { bits, range };
        adc.validate()?;
        Ok(adc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.bits) {
            return Err(Error::invalid(
                "adc.bits",
                format!("{} not in 2..=16", self.bits),
            ));
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::invalid(
                "adc.range",
                format!("{} must be > 0", self.range),
            ));
        }
        Ok(())
    }

    /// Bin width δ.
    pub fn delta(&self) -> f64 {
        self.range / self.half_codes() as f64
    }

    /// 2^(n−1).
    pub fn half_codes(&self) -> i32 {
        1 << (self.bits - 1)
    }

    pub fn min_code(&self) -> i32 {
        -self.half_codes()
    }

    pub fn max_code(&self) -> i32 {
        self.half_codes() - 1
    }

    pub fn n_codes(&self) -> usize {
        1usize << self.bits
    }

    pub fn contains_code(&self, code: i32) -> bool {
        (self.min_code()..=self.max_code()).contains(&code)
    }

    /// Lower and upper edge of the bin for `code`.
    pub fn bin_edges(&self, code: i32) -> (f64, f64) {
        let d = self.delta();
        let c = code as f64 * d;
        (c - d / 2.0, c + d / 2.0)
    }

    /// Default interferometer amplitude for this ADC: `A = 2R/3`.
    pub fn default_amplitude(&self) -> f64 {
        2.0 * self.range / 3.0
    }
}

impl Default for AdcSpec {
    fn default() -> Self {
        AdcSpec {
            bits: 8,
            range: 1.0,
        }
    }
}

/// One complete design point of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Laser linewidth Δν (Hz).
    pub linewidth_hz: f64,
    /// Interferometer delay τ_l (s).
    pub delay_s: f64,
    /// Conversion factor A (V).
    pub amplitude: f64,
    /// Electronic-noise standard deviation (V).
    pub sigma_ele: f64,
    /// Sampling period τ_s of the simulation grid (s).
    pub sample_period_s: f64,
    pub adc: AdcSpec,
}

pub const DEFAULT_SAMPLE_PERIOD_S: f64 = 1e-10;
pub const DEFAULT_SIGMA_ELE: f64 = 0.02;

impl Default for SystemParams {
    fn default() -> Self {
        let adc = AdcSpec::default();
        SystemParams {
            linewidth_hz: 9.5e6,
            delay_s: 6.5e-9,
            amplitude: adc.default_amplitude(),
            sigma_ele: DEFAULT_SIGMA_ELE,
            sample_period_s: DEFAULT_SAMPLE_PERIOD_S,
            adc,
        }
    }
}

impl SystemParams {
    pub fn with_design(mut self, linewidth_hz: f64, delay_s: f64) -> Self {
        self.linewidth_hz = linewidth_hz;
        self.delay_s = delay_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} is not finite")))
            }
        }
        finite("linewidth_hz", self.linewidth_hz)?;
        finite("delay_s", self.delay_s)?;
        finite("amplitude", self.amplitude)?;
        finite("sigma_ele", self.sigma_ele)?;
        finite("sample_period_s", self.sample_period_s)?;
        if self.linewidth_hz < 0.0 {
            return Err(Error::invalid("linewidth_hz", "must be >= 0"));
        }
        if self.delay_s <= 0.0 {
            return Err(Error::invalid("delay_s", "must be > 0"));
        }
        if self.amplitude <= 0.0 {
            return Err(Error::invalid("amplitude", "must be > 0"));
        }
        if self.sigma_ele < 0.0 {
            return Err(Error::invalid("sigma_ele", "must be >= 0"));
        }
        if self.sample_period_s <= 0.0 {
            return Err(Error::invalid("sample_period_s", "must be > 0"));
        }
        self.adc.validate()?;
        crate::phase_sim::delay_index(self.delay_s, self.sample_period_s)?;
        Ok(())
    }

    /// σ² = 2πΔντ_l for this design point.
    pub fn phase_variance(&self) -> f64 {
        crate::entropy::phase_variance(self.linewidth_hz, self.delay_s).sigma2
    }
}
