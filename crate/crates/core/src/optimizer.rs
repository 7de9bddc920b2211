//! Grid search for the design point with the highest generation rate
//! `K = 2·B_ES·H_min`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{analytic_min_entropy, empirical_min_entropy, EntropyMethod, EntropyReport};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::phase_sim::{quantize, simulate_quantum};
use crate::rng::RngSeed;
use crate::spectral::{
    bandwidth_3db, estimate_psd, BandwidthEstimate, DEFAULT_NFFT, DEFAULT_OVERLAP,
    DEFAULT_PLATEAU_BINS,
};

/// Relative K difference under which two points count as co-optimal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Per-point simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    pub n_samples: usize,
    pub nfft: usize,
    pub overlap_fraction: f64,
    pub plateau_bins: usize,
    pub master_seed: RngSeed,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            n_samples: 1 << 22,
            nfft: DEFAULT_NFFT,
            overlap_fraction: DEFAULT_OVERLAP,
            plateau_bins: DEFAULT_PLATEAU_BINS,
            master_seed: RngSeed(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub linewidths_hz: Vec<f64>,
    pub delays_s: Vec<f64>,
    /// Template for everything but linewidth and delay.
    pub base: SystemParams,
    pub sim: SimSettings,
    pub entropy_method: EntropyMethod,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        fn axis(name: &'static str, v: &[f64]) -> Result<()> {
            if v.is_empty() {
                return Err(Error::invalid(name, "must not be empty"));
            }
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::invalid(name, "all values must be finite and > 0"));
            }
            if v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid(name, "values must be strictly increasing"));
            }
            Ok(())
        }
        axis("linewidths_hz", &self.linewidths_hz)?;
        axis("delays_s", &self.delays_s)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub linewidth_hz: f64,
    pub delay_s: f64,
    pub b_es_hz: f64,
    pub h_min_bits: f64,
    pub k_bits_per_s: f64,
    pub f_s_hz: f64,
    pub saturated: bool,
    pub entropy: EntropyReport,
    pub bandwidth: BandwidthEstimate,
}

/// Simulates one design point and scores it.
pub fn evaluate_point(
    linewidth_hz: f64,
    delay_s: f64,
    base: &SystemParams,
    sim: &SimSettings,
    method: EntropyMethod,
    seed: RngSeed,
) -> Result<SweepPoint> {
    let params = base.with_design(linewidth_hz, delay_s);
    let quantum = simulate_quantum(&params, sim.n_samples, seed)?;
    let psd = estimate_psd(&quantum, sim.nfft, sim.overlap_fraction)?;
    let bandwidth = bandwidth_3db(&psd, sim.plateau_bins)?;

    let entropy = match method {
        EntropyMethod::Analytic => {
            let sigma2 = params.phase_variance();
            if sigma2 == 0.0 {
                EntropyReport::degenerate()
            } else {
                analytic_min_entropy(sigma2, params.amplitude, &params.adc)?
            }
        }
        EntropyMethod::Empirical => {
            let mut report = empirical_min_entropy(&quantize(&quantum, &params.adc))?;
            report.sigma2 = Some(params.phase_variance());
            report
        }
    };

    Ok(SweepPoint {
        linewidth_hz,
        delay_s,
        b_es_hz: bandwidth.b_es_hz,
        h_min_bits: entropy.h_min,
        k_bits_per_s: 2.0 * bandwidth.b_es_hz * entropy.h_min,
        f_s_hz: 2.0 * bandwidth.b_es_hz,
        saturated: bandwidth.saturated,
        entropy,
        bandwidth,
    })
}

/// Highest sampling rate the entropy source supports, `f_s = 2·B_ES`.
pub fn recommended_sampling_rate(point: &SweepPoint) -> f64 {
    2.0 * point.b_es_hz
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PointOutcome {
    Ok(SweepPoint),
    Failed { kind: String, message: String },
}

/// One grid cell, indexed `(i, j)` into (linewidths, delays).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub i: usize,
    pub j: usize,
    pub linewidth_hz: f64,
    pub delay_s: f64,
    pub seed: RngSeed,
    pub outcome: PointOutcome,
}

impl SweepEntry {
    pub fn point(&self) -> Option<&SweepPoint> {
        match &self.outcome {
            PointOutcome::Ok(p) => Some(p),
            PointOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Row-major by `(i, j)`.
    pub points: Vec<SweepEntry>,
    /// Best unsaturated point; `None` if every point failed or saturated.
    pub best: Option<SweepPoint>,
    /// Other points within [`TIE_TOLERANCE`] of the best K.
    pub ties: Vec<SweepPoint>,
}

impl SweepResult {
    /// Assembles a result from entries in any order.
    pub fn from_entries(mut points: Vec<SweepEntry>) -> Self {
        points.sort_by_key(|e| (e.i, e.j));

        let candidates: Vec<&SweepPoint> = points
            .iter()
            .filter_map(SweepEntry::point)
            .filter(|p| !p.saturated)
            .collect();
        let k_max = candidates
            .iter()
            .map(|p| p.k_bits_per_s)
            .fold(f64::NEG_INFINITY, f64::max);

        let mut optimal: Vec<SweepPoint> = candidates
            .into_iter()
            .filter(|p| k_max - p.k_bits_per_s <= TIE_TOLERANCE * k_max.abs())
            .copied()
            .collect();
        // Shorter delay first, then narrower linewidth.
        optimal.sort_by(|a, b| {
            a.delay_s
                .total_cmp(&b.delay_s)
                .then(a.linewidth_hz.total_cmp(&b.linewidth_hz))
        });
        let best = if optimal.is_empty() {
            None
        } else {
            Some(optimal.remove(0))
        };
        SweepResult {
            points,
            best,
            ties: optimal,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepEntry> {
        self.points.iter().filter(|e| e.point().is_none())
    }
}

/// Evaluates grid cell `(i, j)` with its derived seed.
pub fn evaluate_grid_cell(grid: &SweepGrid, i: usize, j: usize) -> SweepEntry {
    let linewidth_hz = grid.linewidths_hz[i];
    let delay_s = grid.delays_s[j];
    let seed = grid.sim.master_seed.grid_point(i, j);
    let outcome = match evaluate_point(
        linewidth_hz,
        delay_s,
        &grid.base,
        &grid.sim,
        grid.entropy_method,
        seed,
    ) {
        Ok(p) => PointOutcome::Ok(p),
        Err(e) => PointOutcome::Failed {
            kind: e.kind().to_string(),
            message: e.to_string(),
        },
    };
    SweepEntry {
        i,
        j,
        linewidth_hz,
        delay_s,
        seed,
        outcome,
    }
}

/// Evaluates every cell of the grid in parallel.
pub fn sweep(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let cells: Vec<(usize, usize)> = (0..grid.linewidths_hz.len())
        .flat_map(|i| (0..grid.delays_s.len()).map(move |j| (i, j)))
        .collect();
    let entries = cells
        .into_par_iter()
        .map(|(i, j)| evaluate_grid_cell(grid, i, j))
        .collect();
    Ok(SweepResult::from_entries(entries))
}
