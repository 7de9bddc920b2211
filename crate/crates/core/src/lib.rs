//! Simulation, spectral analysis, min-entropy estimation and design-space
//! search for quantum random number generators that digitize laser phase
//! noise through an unbalanced interferometer.
//!
//! The pipeline mirrors the physical chain:
//!
//! 1. [`phase_sim`] draws a Wiener phase path, forms the delayed
//!    self-interference signal `Q = A·sin(Δθ)`, adds electronic noise and
//!    quantizes.
//! 2. [`spectral`] estimates the power spectrum and its 3-dB bandwidth.
//! 3. [`entropy`] computes the min-entropy analytically and from histograms.
//! 4. [`optimizer`] searches a (linewidth, delay) grid for the highest
//!    generation rate `K = 2·B_ES·H_min`.
//! 5. [`extractor`] compresses raw codes with a Toeplitz hash.

pub mod entropy;
pub mod error;
pub mod extractor;
pub mod io;
pub mod optimizer;
pub mod params;
pub mod phase_sim;
pub mod rng;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
pub use params::{AdcSpec, SystemParams};
pub use rng::RngSeed;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
