use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use lpn_qrng::entropy::{
    analytic_min_entropy, empirical_min_entropy, invert_variance, phase_variance,
    quantum_variance_from_measurement, CodeHistogram, EntropyReport,
};
use lpn_qrng::extractor::{
    extract_stream, monobit_test, output_bits, runs_test, ToeplitzSpec, MIN_TEST_BITS,
};
use lpn_qrng::io::{
    read_analog, read_codes, write_analog, write_codes, write_histogram_csv, write_psd_csv,
    write_sweep_csv,
};
use lpn_qrng::optimizer::{sweep, SweepPoint};
use lpn_qrng::phase_sim::{decimate, simulate, TraceLabel, NOISE_STREAM, PHASE_STREAM};
use lpn_qrng::spectral::{bandwidth_3db, estimate_psd};
use lpn_qrng::AdcSpec;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{si, system_readable, Clock, RunReport};

/// Stream of the master seed reserved for the extractor matrix.
pub const EXTRACTOR_STREAM: u64 = 3;

/// What a command hands back to `main`: the report plus its CSV view.
pub struct Outcome {
    pub report: RunReport,
    pub csv: String,
}

struct Draft {
    command: &'static str,
    config: RunConfig,
    clock: Clock,
    inputs: Value,
    seeds: Value,
    warnings: Vec<String>,
}

impl Draft {
    fn new(command: &'static str, config: &RunConfig) -> Self {
        Draft {
            command,
            config: config.clone(),
            clock: Clock::start(),
            inputs: json!({}),
            seeds: json!({ "master_seed": config.sim.master_seed }),
            warnings: Vec::new(),
        }
    }

    fn finish(self, results: Value, csv: String) -> Outcome {
        Outcome {
            report: RunReport {
                tool_version: lpn_qrng::VERSION,
                command: self.command,
                system_readable: system_readable(&self.config),
                config: self.config,
                inputs: self.inputs,
                seeds: self.seeds,
                results,
                warnings: self.warnings,
                timing: self.clock.timing(),
            },
            csv,
        }
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.out_dir.join(name)
}

fn entropy_json(report: &EntropyReport, amplitude: f64, adc: &AdcSpec) -> Value {
    json!({
        "method": report.method,
        "p_c": report.p_c,
        "p_r": report.p_r,
        "p_max": report.p_max,
        "h_min_bits": report.h_min,
        "sigma2_rad2": report.sigma2,
        "amplitude_v": amplitude,
        "adc_bits": adc.bits,
    })
}

fn entropy_csv(mode: &str, report: &EntropyReport) -> String {
    format!(
        "mode,p_c,p_r,p_max,h_min_bits,sigma2_rad2\n{mode},{},{},{},{},{}\n",
        report.p_c,
        report.p_r,
        report.p_max,
        report.h_min,
        report.sigma2.map_or(String::new(), |s| s.to_string())
    )
}

fn analytic_at(sigma2: f64, amplitude: f64, adc: &AdcSpec) -> Result<EntropyReport, CliError> {
    if sigma2 == 0.0 {
        Ok(EntropyReport::degenerate())
    } else {
        Ok(analytic_min_entropy(sigma2, amplitude, adc)?)
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut draft = Draft::new("simulate", cfg);
    let params = cfg.system_params();
    let seed = cfg.master_seed();
    draft.seeds = json!({
        "master_seed": seed.0,
        "phase_stream": seed.derive(PHASE_STREAM).0,
        "noise_stream": seed.derive(NOISE_STREAM).0,
    });
    let sim = simulate(&params, cfg.sim.n_samples, seed)?;

    let files = [
        ("quantum.f64", "quantum"),
        ("measured.f64", "measured"),
        ("codes.i16", "codes"),
    ];
    write_analog(&out_path(cfg, files[0].0), &sim.quantum, &params, seed.0)?;
    write_analog(&out_path(cfg, files[1].0), &sim.measured, &params, seed.0)?;
    write_codes(
        &out_path(cfg, files[2].0),
        &sim.codes,
        TraceLabel::Quantum,
        &params,
        seed.0,
    )?;

    let n = sim.quantum.samples.len();
    let mut csv = String::from("file,kind,n_samples\n");
    for (file, kind) in files {
        csv.push_str(&format!("{file},{kind},{n}\n"));
    }
    let results = json!({
        "delay_index": sim.delay_index,
        "n_samples_written": n,
        "phase_variance_rad2": params.phase_variance(),
        "files": files.iter().map(|(f, _)| out_path(cfg, f)).collect::<Vec<_>>(),
    });
    Ok(draft.finish(results, csv))
}

pub fn cmd_psd(cfg: &RunConfig, trace: &Path) -> Result<Outcome, CliError> {
    let mut draft = Draft::new("psd", cfg);
    draft.inputs = json!({ "trace": trace });
    let (analog, meta) = read_analog(trace)?;
    draft.seeds = json!({ "trace_seed": meta.seed });
    let psd = estimate_psd(&analog, cfg.spectral.nfft, cfg.spectral.overlap_fraction)?;
    let bw = bandwidth_3db(&psd, cfg.spectral.plateau_bins)?;

    let csv_path = out_path(cfg, "psd.csv");
    write_psd_csv(&csv_path, &psd)?;
    let f_s = 2.0 * bw.b_es_hz;
    let results = json!({
        "trace_label": meta.label,
        "trace_system": meta.system,
        "nfft": psd.nfft,
        "n_segments": psd.n_segments,
        "bin_width_hz": psd.bin_width(),
        "bandwidth": {
            "b_es_hz": bw.b_es_hz,
            "b_es": si(bw.b_es_hz, "Hz"),
            "reference_level_v2_per_hz": bw.reference_level,
            "saturated": bw.saturated,
            "f_s_hz": f_s,
            "f_s": si(f_s, "Sa/s"),
        },
        "psd_csv": csv_path,
    });
    Ok(draft.finish(results, fs::read_to_string(&csv_path)?))
}

pub struct EntropyInputs {
    /// Design parameters were given explicitly on the command line.
    pub design: bool,
    pub codes: Option<PathBuf>,
    pub sigma_q2: Option<f64>,
}

pub fn cmd_entropy(cfg: &RunConfig, inputs: &EntropyInputs) -> Result<Outcome, CliError> {
    let modes: Vec<&str> = [
        inputs.design.then_some("design parameters"),
        inputs.codes.as_ref().map(|_| "--codes"),
        inputs.sigma_q2.map(|_| "--sigma-q2"),
    ]
    .into_iter()
    .flatten()
    .collect();
    if modes.len() > 1 {
        return Err(CliError::AmbiguousInput(modes.join(", ")));
    }

    let mut draft = Draft::new("entropy", cfg);
    let params = cfg.system_params();

    let (mode, report, amplitude, adc, extra) = if let Some(path) = &inputs.codes {
        draft.inputs = json!({ "codes": path });
        let (codes, meta) = read_codes(path)?;
        draft.seeds = json!({ "trace_seed": meta.seed });
        let report = empirical_min_entropy(&codes)?;
        let hist_path = out_path(cfg, "histogram.csv");
        write_histogram_csv(&hist_path, &CodeHistogram::from_trace(&codes))?;
        let extra = json!({ "n_codes": codes.len(), "histogram_csv": hist_path });
        ("empirical", report, meta.system.amplitude, codes.adc, extra)
    } else if let Some(sigma_q2) = inputs.sigma_q2 {
        draft.inputs = json!({ "sigma_q2_v2": sigma_q2 });
        let sigma2 = invert_variance(sigma_q2, params.amplitude)?.sigma2;
        let mut report = analytic_at(sigma2, params.amplitude, &params.adc)?;
        report.sigma2 = Some(sigma2);
        let extra =
            json!({ "sigma_q2_v2": sigma_q2, "linewidth_delay_product": sigma2 / (2.0 * PI) });
        ("variance", report, params.amplitude, params.adc, extra)
    } else {
        let sigma2 = phase_variance(params.linewidth_hz, params.delay_s).sigma2;
        let mut report = analytic_at(sigma2, params.amplitude, &params.adc)?;
        report.sigma2 = Some(sigma2);
        let extra = json!({ "linewidth_hz": params.linewidth_hz, "delay_s": params.delay_s });
        ("analytic", report, params.amplitude, params.adc, extra)
    };
    Ok(draft.finish(
        json!({ "mode": mode, "entropy": entropy_json(&report, amplitude, &adc), "input": extra }),
        entropy_csv(mode, &report),
    ))
}

fn point_json(p: &SweepPoint) -> Value {
    json!({
        "linewidth_hz": p.linewidth_hz,
        "delay_s": p.delay_s,
        "b_es_hz": p.b_es_hz,
        "h_min_bits": p.h_min_bits,
        "k_bits_per_s": p.k_bits_per_s,
        "f_s_hz": p.f_s_hz,
        "saturated": p.saturated,
        "readable": {
            "linewidth": si(p.linewidth_hz, "Hz"),
            "delay": si(p.delay_s, "s"),
            "b_es": si(p.b_es_hz, "Hz"),
            "k": si(p.k_bits_per_s, "bit/s"),
            "f_s": si(p.f_s_hz, "Sa/s"),
        },
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut draft = Draft::new("sweep", cfg);
    let grid = cfg.sweep_grid()?;
    let result = sweep(&grid)?;
    let failures: Vec<Value> = result
        .failures()
        .map(|e| match &e.outcome {
            lpn_qrng::optimizer::PointOutcome::Failed { kind, message } => json!({
                "i": e.i, "j": e.j, "linewidth_hz": e.linewidth_hz, "delay_s": e.delay_s, "kind": kind, "message": message,
            }),
            lpn_qrng::optimizer::PointOutcome::Ok(_) => Value::Null,
        })
        .collect();
    if failures.len() == result.points.len() {
        return Err(CliError::AllPointsFailed(failures.len()));
    }
    draft.seeds = json!({
        "master_seed": grid.sim.master_seed.0,
        "points": result.points.iter().map(|e| json!({ "i": e.i, "j": e.j, "seed": e.seed.0 })).collect::<Vec<_>>(),
    });
    let csv_path = out_path(cfg, "sweep.csv");
    write_sweep_csv(&csv_path, &result)?;
    let results = json!({
        "grid": { "linewidths_hz": grid.linewidths_hz, "delays_s": grid.delays_s, "entropy_method": grid.entropy_method },
        "best": result.best.as_ref().map(point_json),
        "ties": result.ties.iter().map(point_json).collect::<Vec<_>>(),
        "n_points": result.points.len(),
        "failures": failures,
        "sweep_csv": csv_path,
    });
    Ok(draft.finish(results, fs::read_to_string(&csv_path)?))
}

pub fn cmd_extract(cfg: &RunConfig, codes_path: &Path) -> Result<Outcome, CliError> {
    let mut draft = Draft::new("extract", cfg);
    let ex = &cfg.extract;
    draft.inputs = json!({ "codes": codes_path });
    let (codes, meta) = read_codes(codes_path)?;
    let used = decimate(&codes, ex.stride)?;

    let (n_out, h_min) = match (ex.output_bits, ex.h_min_bits) {
        (Some(_), Some(_)) => {
            return Err(CliError::AmbiguousInput("output_bits, h_min_bits".into()))
        }
        (Some(n), None) => (n, None),
        (None, Some(h)) => (output_bits(h, codes.adc.bits, ex.input_bits), Some(h)),
        (None, None) => {
            let sys = meta.system;
            let h = analytic_at(sys.phase_variance(), sys.amplitude, &codes.adc)?.h_min;
            (output_bits(h, codes.adc.bits, ex.input_bits), Some(h))
        }
    };
    let spec = match &ex.seed_file {
        Some(path) => {
            draft.seeds = json!({ "extractor_seed_file": path, "trace_seed": meta.seed });
            ToeplitzSpec::from_seed_bytes(ex.input_bits, n_out, &fs::read(path)?)?
        }
        None => {
            let seed = cfg.master_seed().derive(EXTRACTOR_STREAM);
            draft.seeds = json!({
                "master_seed": cfg.sim.master_seed,
                "extractor_stream": seed.0,
                "trace_seed": meta.seed,
            });
            ToeplitzSpec::from_seed(ex.input_bits, n_out, seed)?
        }
    };
    if spec.is_zero() {
        draft
            .warnings
            .push("extractor seed is all zero; output bits are all zero".into());
    }

    let bits = extract_stream(&used, &spec)?;
    let bits_path = out_path(cfg, "bits.bin");
    fs::write(&bits_path, bits.to_bytes())?;

    let sane = bits.len() >= MIN_TEST_BITS;
    let (monobit, runs) = if sane {
        (Some(monobit_test(&bits)?), Some(runs_test(&bits)?))
    } else {
        (None, None)
    };
    let per_sample = if used.is_empty() {
        0.0
    } else {
        bits.len() as f64 / used.len() as f64
    };
    let rate = per_sample / used.sample_period_s;
    let results = json!({
        "input_bits": spec.input_bits(),
        "output_bits": spec.output_bits(),
        "h_min_bits": h_min,
        "stride": ex.stride,
        "n_codes_in_file": codes.len(),
        "n_codes_used": used.len(),
        "n_blocks": bits.len() / spec.output_bits(),
        "n_output_bits": bits.len(),
        "bits_per_input_sample": per_sample,
        "output_rate_bits_per_s": rate,
        "output_rate": si(rate, "bit/s"),
        "bits_file": bits_path,
        "sanity": { "alpha": 0.01, "monobit_p": monobit, "runs_p": runs },
    });
    let fmt = |p: Option<f64>| p.map_or(String::new(), |v| v.to_string());
    let csv = format!(
        "n_output_bits,bits_per_input_sample,monobit_p,runs_p\n{},{},{},{}\n",
        bits.len(),
        per_sample,
        fmt(monobit),
        fmt(runs)
    );
    Ok(draft.finish(results, csv))
}

pub fn cmd_invert_variance(
    cfg: &RunConfig,
    sigma_m2: f64,
    sigma_c2: f64,
) -> Result<Outcome, CliError> {
    let mut draft = Draft::new("invert-variance", cfg);
    draft.inputs = json!({ "sigma_m2_v2": sigma_m2, "sigma_c2_v2": sigma_c2 });
    let params = cfg.system_params();
    let sigma_q2 = quantum_variance_from_measurement(sigma_m2, sigma_c2)?;
    let sigma2 = invert_variance(sigma_q2, params.amplitude)?.sigma2;
    let product = sigma2 / (2.0 * PI);
    let linewidth = product / params.delay_s;
    let results = json!({
        "sigma_q2_v2": sigma_q2,
        "sigma2_rad2": sigma2,
        "linewidth_delay_product": product,
        "linewidth_at_configured_delay_hz": linewidth,
        "readable": {
            "delay": si(params.delay_s, "s"),
            "linewidth_at_configured_delay": si(linewidth, "Hz"),
        },
    });
    let csv =
        format!("sigma_q2_v2,sigma2_rad2,linewidth_delay_product\n{sigma_q2},{sigma2},{product}\n");
    Ok(draft.finish(results, csv))
}
