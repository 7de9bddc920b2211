//! `lpnqrng`: batch front end for simulating laser-phase-noise QRNGs,
//! estimating their bandwidth and min-entropy, sweeping designs and
//! extracting random bits.
//!
//! Exit status: 0 success, 2 validation, 3 I/O, 4 domain error. Failures
//! print a single JSON line on stderr.

mod commands;
mod config;
mod error;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lpn_qrng::entropy::EntropyMethod;

use crate::commands::{EntropyInputs, Outcome};
use crate::config::{RunConfig, SweepSection};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Analytic,
    Empirical,
}

#[derive(Parser)]
#[command(
    name = "lpnqrng",
    version,
    about = "Laser-phase-noise QRNG simulator and design optimizer"
)]
struct Cli {
    /// JSON run config (or a previous run report); omitted fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for output files, overriding the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// What to print on stdout: the JSON run report or the CSV table.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate quantum, measured and quantized traces.
    Simulate {
        /// Laser linewidth Δν (Hz).
        #[arg(long)]
        linewidth: Option<f64>,
        /// Interferometer delay τ_l (s).
        #[arg(long)]
        delay: Option<f64>,
        /// Phase-path length before the delay is applied.
        #[arg(long)]
        n_samples: Option<usize>,
    },
    /// Estimate the PSD of an analog trace and its 3-dB bandwidth.
    Psd {
        /// Analog trace with a `.meta.json` sidecar.
        trace: PathBuf,
        #[arg(long)]
        nfft: Option<usize>,
        #[arg(long)]
        overlap: Option<f64>,
        #[arg(long)]
        plateau_bins: Option<usize>,
    },
    /// Min-entropy from design parameters, a code trace, or a quantum variance.
    Entropy {
        #[arg(long)]
        linewidth: Option<f64>,
        #[arg(long)]
        delay: Option<f64>,
        /// Quantized trace for the empirical estimate.
        #[arg(long)]
        codes: Option<PathBuf>,
        /// Quantum-noise variance σ_Q² (V²), inverted to σ² first.
        #[arg(long)]
        sigma_q2: Option<f64>,
    },
    /// Evaluate K = 2·B_ES·H_min over a (linewidth × delay) grid.
    Sweep {
        /// Comma-separated linewidths (Hz).
        #[arg(long, value_delimiter = ',')]
        linewidths: Option<Vec<f64>>,
        /// Comma-separated delays (s).
        #[arg(long, value_delimiter = ',')]
        delays: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        n_samples: Option<usize>,
    },
    /// Toeplitz-hash a code trace into random bits.
    Extract {
        /// Quantized trace with a `.meta.json` sidecar.
        codes: PathBuf,
        /// Keep every N-th code.
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        input_bits: Option<usize>,
        #[arg(long, conflicts_with = "h_min")]
        output_bits: Option<usize>,
        /// Min-entropy per sample used to size the output.
        #[arg(long)]
        h_min: Option<f64>,
        /// Raw Toeplitz seed, n_in + n_out − 1 bits, MSB-first.
        #[arg(long)]
        seed_file: Option<PathBuf>,
    },
    /// Infer σ² and Δν·τ_l from a measured and a classical variance.
    InvertVariance {
        /// Measured variance σ_M² (V²).
        #[arg(long)]
        sigma_m2: f64,
        /// Classical (electronic) variance σ_C² (V²).
        #[arg(long, default_value_t = 0.0)]
        sigma_c2: f64,
        /// Conversion factor A (V), overriding the config.
        #[arg(long)]
        amplitude: Option<f64>,
    },
}

enum Job {
    Simulate,
    Psd(PathBuf),
    Entropy(EntropyInputs),
    Sweep,
    Extract(PathBuf),
    InvertVariance(f64, f64),
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.sim.master_seed, cli.seed);
    set(&mut cfg.output.out_dir, cli.out_dir);

    // Apply command-line overrides before resolving defaults.
    let job = match cli.command {
        Command::Simulate {
            linewidth,
            delay,
            n_samples,
        } => {
            set(&mut cfg.system.linewidth_hz, linewidth);
            set(&mut cfg.system.delay_s, delay);
            set(&mut cfg.sim.n_samples, n_samples);
            Job::Simulate
        }
        Command::Psd {
            trace: t,
            nfft,
            overlap,
            plateau_bins,
        } => {
            set(&mut cfg.spectral.nfft, nfft);
            set(&mut cfg.spectral.overlap_fraction, overlap);
            set(&mut cfg.spectral.plateau_bins, plateau_bins);
            Job::Psd(t)
        }
        Command::Entropy {
            linewidth,
            delay,
            codes,
            sigma_q2,
        } => {
            let design = linewidth.is_some() || delay.is_some();
            set(&mut cfg.system.linewidth_hz, linewidth);
            set(&mut cfg.system.delay_s, delay);
            Job::Entropy(EntropyInputs {
                design,
                codes,
                sigma_q2,
            })
        }
        Command::Sweep {
            linewidths,
            delays,
            method,
            n_samples,
        } => {
            if linewidths.is_some() || delays.is_some() {
                let section = cfg.sweep.get_or_insert_with(SweepSection::default);
                set(&mut section.linewidths_hz, linewidths);
                set(&mut section.delays_s, delays);
            }
            set(
                &mut cfg.entropy_method,
                method.map(|m| match m {
                    Method::Analytic => EntropyMethod::Analytic,
                    Method::Empirical => EntropyMethod::Empirical,
                }),
            );
            set(&mut cfg.sim.n_samples, n_samples);
            Job::Sweep
        }
        Command::Extract {
            codes,
            stride,
            input_bits,
            output_bits,
            h_min,
            seed_file,
        } => {
            set(&mut cfg.extract.stride, stride);
            set(&mut cfg.extract.input_bits, input_bits);
            if output_bits.is_some() || h_min.is_some() {
                cfg.extract.output_bits = output_bits;
                cfg.extract.h_min_bits = h_min;
            }
            if seed_file.is_some() {
                cfg.extract.seed_file = seed_file;
            }
            Job::Extract(codes)
        }
        Command::InvertVariance {
            sigma_m2,
            sigma_c2,
            amplitude,
        } => {
            if amplitude.is_some() {
                cfg.system.amplitude = amplitude;
            }
            Job::InvertVariance(sigma_m2, sigma_c2)
        }
    };
    let cfg = cfg.resolve()?;
    fs::create_dir_all(&cfg.output.out_dir)?;

    let outcome = match job {
        Job::Simulate => commands::cmd_simulate(&cfg)?,
        Job::Psd(trace) => commands::cmd_psd(&cfg, &trace)?,
        Job::Entropy(inputs) => commands::cmd_entropy(&cfg, &inputs)?,
        Job::Sweep => commands::cmd_sweep(&cfg)?,
        Job::Extract(codes) => commands::cmd_extract(&cfg, &codes)?,
        Job::InvertVariance(m2, c2) => commands::cmd_invert_variance(&cfg, m2, c2)?,
    };
    outcome.report.write(&cfg.output.out_dir)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(outcome) => {
            for w in &outcome.report.warnings {
                eprintln!("{}", serde_json::json!({ "warning": w }));
            }
            match format {
                Format::Json => match serde_json::to_string_pretty(&outcome.report) {
                    Ok(text) => println!("{text}"),
                    Err(e) => {
                        let e = CliError::from(e);
                        eprintln!("{}", e.to_line());
                        return ExitCode::from(e.exit_code() as u8);
                    }
                },
                Format::Csv => print!("{}", outcome.csv),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
