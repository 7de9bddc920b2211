//! Frequency (monobit) and runs statistics with two-sided normal
//! approximation p-values, in the form used by NIST SP 800-22.

use statrs::function::erf::erfc;

use super::bits::BitBlock;
use crate::error::{Error, Result};

pub const MIN_TEST_BITS: usize = 100;

fn check_len(bits: &BitBlock) -> Result<f64> {
    if bits.len() < MIN_TEST_BITS {
        return Err(Error::TooFewBits {
            len: bits.len(),
            min: MIN_TEST_BITS,
        });
    }
    Ok(bits.len() as f64)
}

pub fn monobit_test(bits: &BitBlock) -> Result<f64> {
    let n = check_len(bits)?;
    let ones = bits.count_ones() as f64;
    let s = 2.0 * ones - n;
    Ok(erfc(s.abs() / (2.0 * n).sqrt()))
}

/// Returns 0 when the ones-proportion prerequisite `|π − ½| < 2/√n` fails.
pub fn runs_test(bits: &BitBlock) -> Result<f64> {
    let n = check_len(bits)?;
    let pi = bits.count_ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(0.0);
    }
    let mut runs = 1u64;
    let mut prev = bits.get(0);
    for b in bits.iter().skip(1) {
        if b != prev {
            runs += 1;
        }
        prev = b;
    }
    let expected = 2.0 * n * pi * (1.0 - pi);
    Ok(erfc(
        (runs as f64 - expected).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)),
    ))
}
