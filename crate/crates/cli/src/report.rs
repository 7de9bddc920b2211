use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

/// Formats `value` with an SI prefix, e.g. `185.18 MHz`.
pub fn si(value: f64, unit: &str) -> String {
    const PREFIXES: [(f64, &str); 9] = [
        (1e12, "T"),
        (1e9, "G"),
        (1e6, "M"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "µ"),
        (1e-9, "n"),
        (1e-12, "p"),
    ];
    if value == 0.0 || !value.is_finite() {
        return format!("{value} {unit}");
    }
    let (scale, prefix) = PREFIXES
        .iter()
        .copied()
        .find(|(s, _)| value.abs() >= *s)
        .unwrap_or(PREFIXES[PREFIXES.len() - 1]);
    let scaled = format!("{:.4}", value / scale);
    let scaled = scaled.trim_end_matches('0').trim_end_matches('.');
    format!("{scaled} {prefix}{unit}")
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    /// Human-readable echo of the design point.
    pub system_readable: Value,
    /// Command-line inputs beyond the config (file paths, mode values).
    pub inputs: Value,
    pub seeds: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

pub struct Clock {
    started: SystemTime,
    instant: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Clock {
            started: SystemTime::now(),
            instant: Instant::now(),
        }
    }

    pub fn timing(&self) -> Timing {
        Timing {
            started_unix_s: self
                .started
                .duration_since(UNIX_EPOCH)
                .map_or(0.0, |d| d.as_secs_f64()),
            elapsed_s: self.instant.elapsed().as_secs_f64(),
        }
    }
}

pub fn system_readable(cfg: &RunConfig) -> Value {
    let p = cfg.system_params();
    serde_json::json!({
        "linewidth": si(p.linewidth_hz, "Hz"),
        "delay": si(p.delay_s, "s"),
        "amplitude": si(p.amplitude, "V"),
        "sigma_ele": si(p.sigma_ele, "V"),
        "sample_period": si(p.sample_period_s, "s"),
        "adc": format!("{}-bit, ±{}", p.adc.bits, si(p.adc.range, "V")),
    })
}

impl RunReport {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}_report.json", self.command));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
