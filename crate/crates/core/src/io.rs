//! On-disk formats.
//!
//! * Analog traces: raw little-endian `f64` samples.
//! * Code traces: raw little-endian `i16` codes, whatever the resolution.
//! * Every trace file `x.bin` has a JSON sidecar `x.bin.meta.json`
//!   ([`TraceMetadata`]).
//! * PSD, histogram and sweep exports are CSV with a single header line.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::entropy::CodeHistogram;
use crate::error::{Error, Result};
use crate::optimizer::SweepResult;
use crate::params::{AdcSpec, SystemParams};
use crate::phase_sim::{AnalogTrace, QuantizedTrace, TraceLabel};
use crate::spectral::PsdEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleFormat {
    #[serde(rename = "f64le")]
    F64Le,
    #[serde(rename = "i16le")]
    I16Le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub format: SampleFormat,
    pub n_samples: usize,
    pub sample_period_s: f64,
    /// Source signal; for code traces, the analog trace that was quantized.
    pub label: TraceLabel,
    pub adc: AdcSpec,
    pub system: SystemParams,
    pub seed: u64,
    pub tool_version: String,
}

pub fn metadata_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_metadata(path: &Path, meta: &TraceMetadata) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(metadata_path(path), text)?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<TraceMetadata> {
    let meta_path = metadata_path(path);
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::Metadata {
        path: meta_path.display().to_string(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Metadata {
        path: meta_path.display().to_string(),
        reason: e.to_string(),
    })
}

fn check_format(
    path: &Path,
    meta: &TraceMetadata,
    want: SampleFormat,
    width: usize,
    bytes: usize,
) -> Result<()> {
    let bad = |reason: String| Error::Metadata {
        path: path.display().to_string(),
        reason,
    };
    if meta.format != want {
        return Err(bad(format!(
            "expected {want:?} samples, metadata says {:?}",
            meta.format
        )));
    }
    if bytes != meta.n_samples * width {
        return Err(bad(format!(
            "file holds {bytes} bytes, metadata declares {} samples",
            meta.n_samples
        )));
    }
    Ok(())
}

pub fn write_analog(
    path: &Path,
    trace: &AnalogTrace,
    system: &SystemParams,
    seed: u64,
) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for s in &trace.samples {
        out.write_all(&s.to_le_bytes())?;
    }
    out.flush()?;
    write_metadata(
        path,
        &TraceMetadata {
            format: SampleFormat::F64Le,
            n_samples: trace.len(),
            sample_period_s: trace.sample_period_s,
            label: trace.label,
            adc: system.adc,
            system: *system,
            seed,
            tool_version: crate::VERSION.to_string(),
        },
    )
}

pub fn read_analog(path: &Path) -> Result<(AnalogTrace, TraceMetadata)> {
    let meta = read_metadata(path)?;
    let bytes = fs::read(path)?;
    check_format(path, &meta, SampleFormat::F64Le, 8, bytes.len())?;
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((
        AnalogTrace {
            samples,
            sample_period_s: meta.sample_period_s,
            label: meta.label,
        },
        meta,
    ))
}

pub fn write_codes(
    path: &Path,
    codes: &QuantizedTrace,
    source: TraceLabel,
    system: &SystemParams,
    seed: u64,
) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for c in &codes.codes {
        out.write_all(&c.to_le_bytes())?;
    }
    out.flush()?;
    write_metadata(
        path,
        &TraceMetadata {
            format: SampleFormat::I16Le,
            n_samples: codes.len(),
            sample_period_s: codes.sample_period_s,
            label: source,
            adc: codes.adc,
            system: *system,
            seed,
            tool_version: crate::VERSION.to_string(),
        },
    )
}

pub fn read_codes(path: &Path) -> Result<(QuantizedTrace, TraceMetadata)> {
    let meta = read_metadata(path)?;
    meta.adc.validate()?;
    let bytes = fs::read(path)?;
    check_format(path, &meta, SampleFormat::I16Le, 2, bytes.len())?;
    let codes: Vec<i16> = bytes
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    if let Some(bad) = codes.iter().find(|&&c| !meta.adc.contains_code(c as i32)) {
        return Err(Error::InvalidBin {
            code: *bad as i32,
            bits: meta.adc.bits,
        });
    }
    Ok((
        QuantizedTrace {
            codes,
            adc: meta.adc,
            sample_period_s: meta.sample_period_s,
        },
        meta,
    ))
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_psd_csv(path: &Path, psd: &PsdEstimate) -> Result<()> {
    write_csv(
        path,
        "freq_hz,power_v2_per_hz",
        psd.freqs
            .iter()
            .zip(&psd.power)
            .map(|(f, p)| format!("{f:e},{p:e}")),
    )
}

pub fn write_histogram_csv(path: &Path, hist: &CodeHistogram) -> Result<()> {
    write_csv(
        path,
        "code,count,frequency",
        hist.rows().map(|(c, n, f)| format!("{c},{n},{f:e}")),
    )
}

pub const SWEEP_CSV_HEADER: &str =
    "linewidth_hz,delay_s,b_es_hz,h_min_bits,k_bits_per_s,f_s_hz,saturated";

/// One row per evaluated point in `(i, j)` order; failed points are omitted
/// here and listed in the JSON report.
pub fn sweep_csv_rows(result: &SweepResult) -> Vec<String> {
    result
        .points
        .iter()
        .filter_map(|e| e.point())
        .map(|p| {
            format!(
                "{:e},{:e},{:e},{},{:e},{:e},{}",
                p.linewidth_hz,
                p.delay_s,
                p.b_es_hz,
                p.h_min_bits,
                p.k_bits_per_s,
                p.f_s_hz,
                p.saturated
            )
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    write_csv(path, SWEEP_CSV_HEADER, sweep_csv_rows(result).into_iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_sim::{quantize, simulate};
    use crate::rng::RngSeed;

    #[test]
    fn analog_and_code_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let params = SystemParams::default();
        let sim = simulate(&params, 5000, RngSeed(8)).unwrap();

        let q_path = dir.path().join("q.f64");
        write_analog(&q_path, &sim.quantum, &params, 8).unwrap();
        let (q, meta) = read_analog(&q_path).unwrap();
        assert_eq!(q, sim.quantum);
        assert_eq!(meta.seed, 8);
        assert_eq!(meta.n_samples, sim.quantum.len());
        assert_eq!(
            fs::metadata(&q_path).unwrap().len() as usize,
            8 * sim.quantum.len()
        );

        let c_path = dir.path().join("codes.i16");
        write_codes(&c_path, &sim.codes, TraceLabel::Quantum, &params, 8).unwrap();
        let (c, meta) = read_codes(&c_path).unwrap();
        assert_eq!(c, quantize(&sim.quantum, &params.adc));
        assert_eq!(meta.format, SampleFormat::I16Le);
        assert!(read_analog(&c_path).is_err());
    }

    #[test]
    fn missing_sidecar_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("raw.f64");
        fs::write(&p, [0u8; 16]).unwrap();
        match read_analog(&p) {
            Err(e) => assert_eq!(e.kind(), "missing-metadata"),
            Ok(_) => panic!("expected error"),
        }
    }

    #[test]
    fn psd_csv_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("psd.csv");
        let psd = PsdEstimate {
            freqs: vec![0.0, 1.0],
            power: vec![2.0, 3.0],
            n_segments: 1,
            nfft: 2,
        };
        write_psd_csv(&p, &psd).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "freq_hz,power_v2_per_hz");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "1e0,3e0");
    }
}
