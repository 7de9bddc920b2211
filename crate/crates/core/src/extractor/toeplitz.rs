use rayon::prelude::*;

use super::bits::BitBlock;
use crate::error::{Error, Result};
use crate::phase_sim::QuantizedTrace;
use crate::rng::RngSeed;

/// An `output_bits × input_bits` Toeplitz matrix over GF(2).
///
/// `seed_bits` holds the first column top to bottom (`T[0][0] … T[m−1][0]`)
/// followed by the first row left to right without the shared corner
/// (`T[0][1] … T[0][n−1]`), `n + m − 1` bits in total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzSpec {
    input_bits: usize,
    output_bits: usize,
    seed_bits: BitBlock,
    /// `diagonals[t]` is the entry on diagonal `c − r = t − (m − 1)`, so row
    /// `r` is the window `diagonals[m − 1 − r ..][.. n]`.
    diagonals: BitBlock,
}

impl ToeplitzSpec {
    pub fn new(input_bits: usize, output_bits: usize, seed_bits: BitBlock) -> Result<Self> {
        if output_bits < 1 || output_bits > input_bits {
            return Err(Error::invalid(
                "output_bits",
                format!("{output_bits} not in [1, input_bits = {input_bits}]"),
            ));
        }
        let needed = input_bits + output_bits - 1;
        if seed_bits.len() != needed {
            return Err(Error::LengthMismatch {
                expected: needed,
                actual: seed_bits.len(),
            });
        }
        let m = output_bits;
        let mut diagonals = BitBlock::zeros(needed);
        for t in 0..needed {
            let v = if t < m {
                seed_bits.get(m - 1 - t)
            } else {
                seed_bits.get(t)
            };
            diagonals.set(t, v);
        }
        Ok(ToeplitzSpec {
            input_bits,
            output_bits,
            seed_bits,
            diagonals,
        })
    }

    /// Seed bits drawn from a seeded generator stream.
    pub fn from_seed(input_bits: usize, output_bits: usize, seed: RngSeed) -> Result<Self> {
        let n = (input_bits + output_bits).saturating_sub(1);
        let mut stream = seed.stream();
        let mut bits = BitBlock::zeros(n);
        for i in 0..n {
            bits.set(i, stream.bit());
        }
        Self::new(input_bits, output_bits, bits)
    }

    /// Seed bits read MSB-first from raw bytes; surplus bits are ignored.
    pub fn from_seed_bytes(input_bits: usize, output_bits: usize, bytes: &[u8]) -> Result<Self> {
        let n = (input_bits + output_bits).saturating_sub(1);
        let bits = BitBlock::from_bytes(bytes, n).ok_or(Error::LengthMismatch {
            expected: n,
            actual: bytes.len() * 8,
        })?;
        Self::new(input_bits, output_bits, bits)
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn seed_bits(&self) -> &BitBlock {
        &self.seed_bits
    }

    pub fn is_zero(&self) -> bool {
        self.seed_bits.count_ones() == 0
    }

    fn row_bit(&self, r: usize, x: &BitBlock) -> bool {
        let base = self.output_bits - 1 - r;
        let parity = x.words().iter().enumerate().fold(0u32, |acc, (w, &xw)| {
            acc ^ (self.diagonals.word_at(base + 64 * w) & xw).count_ones()
        });
        parity & 1 == 1
    }
}

/// Output/input ratio for a source of `h_min_bits` per `adc_bits`-bit sample.
pub fn extraction_ratio(h_min_bits: f64, adc_bits: u8) -> f64 {
    h_min_bits / adc_bits as f64
}

/// `floor(ratio · input_bits)`.
pub fn output_bits(h_min_bits: f64, adc_bits: u8, input_bits: usize) -> usize {
    (extraction_ratio(h_min_bits, adc_bits) * input_bits as f64)
        .floor()
        .max(0.0) as usize
}

/// `y = T·x` over GF(2).
pub fn extract_block(block: &BitBlock, spec: &ToeplitzSpec) -> Result<BitBlock> {
    if block.len() != spec.input_bits {
        return Err(Error::LengthMismatch {
            expected: spec.input_bits,
            actual: block.len(),
        });
    }
    let mut out = BitBlock::zeros(spec.output_bits);
    for r in 0..spec.output_bits {
        if spec.row_bit(r, block) {
            out.set(r, true);
        }
    }
    Ok(out)
}

/// Codes as `n`-bit two's-complement words, MSB first, concatenated.
pub fn serialize_codes(codes: &QuantizedTrace) -> BitBlock {
    let width = codes.adc.bits as u32;
    let mask = (1u64 << width) - 1;
    let mut bits = BitBlock::zeros(0);
    for &c in &codes.codes {
        bits.push_word(c as i64 as u64 & mask, width);
    }
    bits
}

/// Blockwise extraction; a trailing partial block is discarded.
pub fn extract_stream(codes: &QuantizedTrace, spec: &ToeplitzSpec) -> Result<BitBlock> {
    let raw = serialize_codes(codes);
    let n_blocks = raw.len() / spec.input_bits;
    let blocks: Vec<BitBlock> = (0..n_blocks)
        .into_par_iter()
        .map(|b| extract_block(&raw.slice(b * spec.input_bits, spec.input_bits), spec))
        .collect::<Result<_>>()?;
    let mut out = BitBlock::zeros(0);
    for b in &blocks {
        out.extend(b);
    }
    Ok(out)
}
