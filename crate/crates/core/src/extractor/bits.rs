/// Fixed-length bit string, packed most-significant-bit first into `u64`
/// words. Bits past `len` in the last word are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitBlock {
    words: Vec<u64>,
    len: usize,
}

impl BitBlock {
    pub fn zeros(len: usize) -> Self {
        BitBlock {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = BitBlock::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// First `len` bits of `bytes`, MSB of each byte first.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if len > bytes.len() * 8 {
            return None;
        }
        let mut b = BitBlock::zeros(len);
        for i in 0..len {
            b.set(i, bytes[i / 8] >> (7 - i % 8) & 1 == 1);
        }
        Some(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] >> (63 - i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (63 - i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, v: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_word(&mut self, value: u64, width: u32) {
        assert!(width <= 64);
        for shift in (0..width).rev() {
            self.push(value >> shift & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitBlock) {
        for v in other.iter() {
            self.push(v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bits `[start, start + n)` as a new block.
    pub fn slice(&self, start: usize, n: usize) -> BitBlock {
        assert!(start + n <= self.len);
        let mut out = BitBlock::zeros(n);
        for (w, word) in out.words.iter_mut().enumerate() {
            *word = self.word_at(start + 64 * w);
        }
        out.clear_tail();
        out
    }

    /// 64 bits starting at bit offset `offset`; bits past the end read as 0.
    pub(crate) fn word_at(&self, offset: usize) -> u64 {
        let (w, s) = (offset / 64, offset % 64);
        let hi = self.words.get(w).copied().unwrap_or(0);
        if s == 0 {
            hi
        } else {
            let lo = self.words.get(w + 1).copied().unwrap_or(0);
            (hi << s) | (lo >> (64 - s))
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 << (64 - rem);
            }
        }
    }

    pub fn xor(&self, other: &BitBlock) -> BitBlock {
        assert_eq!(self.len, other.len);
        BitBlock {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    /// Packed bytes, MSB first; the final byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_be_bytes())
            .take(n)
            .collect()
    }
}
