//! Run configuration: a single JSON document where every field is optional
//! and the resolved form (all defaults filled in) is echoed in each report.

use std::fs;
use std::path::{Path, PathBuf};

use lpn_qrng::entropy::EntropyMethod;
use lpn_qrng::optimizer::{SimSettings, SweepGrid};
use lpn_qrng::params::{DEFAULT_SAMPLE_PERIOD_S, DEFAULT_SIGMA_ELE};
use lpn_qrng::spectral::{DEFAULT_NFFT, DEFAULT_OVERLAP, DEFAULT_PLATEAU_BINS};
use lpn_qrng::{AdcSpec, RngSeed, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcSection {
    pub bits: u8,
    pub range: f64,
}

impl Default for AdcSection {
    fn default() -> Self {
        let adc = AdcSpec::default();
        AdcSection {
            bits: adc.bits,
            range: adc.range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub linewidth_hz: f64,
    pub delay_s: f64,
    /// Defaults to the ADC's default amplitude when omitted.
    pub amplitude: Option<f64>,
    pub sigma_ele: f64,
    pub sample_period_s: f64,
    pub adc: AdcSection,
}

impl Default for SystemSection {
    fn default() -> Self {
        let sys = SystemParams::default();
        SystemSection {
            linewidth_hz: sys.linewidth_hz,
            delay_s: sys.delay_s,
            amplitude: None,
            sigma_ele: DEFAULT_SIGMA_ELE,
            sample_period_s: DEFAULT_SAMPLE_PERIOD_S,
            adc: AdcSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n_samples: usize,
    pub master_seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        let sim = SimSettings::default();
        SimSection {
            n_samples: sim.n_samples,
            master_seed: sim.master_seed.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub nfft: usize,
    pub overlap_fraction: f64,
    pub plateau_bins: usize,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection {
            nfft: DEFAULT_NFFT,
            overlap_fraction: DEFAULT_OVERLAP,
            plateau_bins: DEFAULT_PLATEAU_BINS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub linewidths_hz: Vec<f64>,
    pub delays_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractSection {
    pub input_bits: usize,
    /// Explicit output length; otherwise derived from `h_min_bits`.
    pub output_bits: Option<usize>,
    /// Min-entropy per sample; otherwise computed analytically from the
    /// codes' generating parameters.
    pub h_min_bits: Option<f64>,
    /// Keep every `stride`-th code before extraction. Choose
    /// `round(1 / (f_s·τ_s))` to digitize at the recommended rate.
    pub stride: usize,
    /// Raw seed bytes, MSB-first; otherwise derived from the master seed.
    pub seed_file: Option<PathBuf>,
}

impl Default for ExtractSection {
    fn default() -> Self {
        ExtractSection {
            input_bits: 2048,
            output_bits: None,
            h_min_bits: None,
            stride: 1,
            seed_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub out_dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub sim: SimSection,
    pub spectral: SpectralSection,
    pub entropy_method: EntropyMethod,
    pub sweep: Option<SweepSection>,
    pub extract: ExtractSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Reads a config file. A previously emitted run report is also
    /// accepted, in which case its resolved config is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::ConfigIo {
            path: path.display().to_string(),
            source: e,
        })?;
        let invalid = |e: serde_json::Error| CliError::InvalidConfig {
            path: path.display().to_string(),
            reason: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(invalid)?;
        let is_report = value.get("tool_version").is_some() && value.get("config").is_some();
        let body = if is_report {
            value["config"].clone()
        } else {
            value
        };
        serde_json::from_value(body).map_err(invalid)
    }

    /// Fills every defaulted field and validates the system parameters.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let adc = self.adc()?;
        self.system.amplitude.get_or_insert(adc.default_amplitude());
        self.system_params().validate()?;
        Ok(self)
    }

    pub fn adc(&self) -> Result<AdcSpec, CliError> {
        Ok(AdcSpec::new(self.system.adc.bits, self.system.adc.range)?)
    }

    pub fn system_params(&self) -> SystemParams {
        let adc = AdcSpec {
            bits: self.system.adc.bits,
            range: self.system.adc.range,
        };
        SystemParams {
            linewidth_hz: self.system.linewidth_hz,
            delay_s: self.system.delay_s,
            amplitude: self
                .system
                .amplitude
                .unwrap_or_else(|| adc.default_amplitude()),
            sigma_ele: self.system.sigma_ele,
            sample_period_s: self.system.sample_period_s,
            adc,
        }
    }

    pub fn master_seed(&self) -> RngSeed {
        RngSeed(self.sim.master_seed)
    }

    pub fn sim_settings(&self) -> SimSettings {
        SimSettings {
            n_samples: self.sim.n_samples,
            nfft: self.spectral.nfft,
            overlap_fraction: self.spectral.overlap_fraction,
            plateau_bins: self.spectral.plateau_bins,
            master_seed: self.master_seed(),
        }
    }

    /// Builds the sweep grid with both axes sorted ascending and
    /// de-duplicated, so the listing order of a grid does not matter.
    pub fn sweep_grid(&self) -> Result<SweepGrid, CliError> {
        let section = self.sweep.as_ref().ok_or_else(|| {
            CliError::MissingInput("sweep grid (config `sweep` or --linewidths/--delays)".into())
        })?;
        let canonical = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        Ok(SweepGrid {
            linewidths_hz: canonical(&section.linewidths_hz),
            delays_s: canonical(&section.delays_s),
            base: self.system_params(),
            sim: self.sim_settings(),
            entropy_method: self.entropy_method,
        })
    }
}
