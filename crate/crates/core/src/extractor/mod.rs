//! Toeplitz-hash randomness extraction over GF(2) and output sanity checks.

mod bits;
mod stats;
mod toeplitz;

pub use bits::BitBlock;
pub use stats::{monobit_test, runs_test, MIN_TEST_BITS};
pub use toeplitz::{
    extract_block, extract_stream, extraction_ratio, output_bits, serialize_codes, ToeplitzSpec,
};
