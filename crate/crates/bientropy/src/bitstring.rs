//! Exact finite binary strings and their binary derivatives.
//!
//! A [`BitString`] is a sequence of `n >= 1` bits with positional equality:
//! two strings are equal iff they have the same length and the same bit at
//! every position. Bits are packed least-significant-first into `u64` words
//! so that derivative chains cost O(n^2 / 64) word operations; all semantics
//! are positional and independent of the packing.
//!
//! The first binary derivative of `s` is formed by XORing adjacent bit
//! pairs. The linear variant drops a bit per level (length `n-1`); the
//! cyclic variant also XORs the last bit with the first and preserves
//! length. Iterating the derivative exposes periodic structure: a string
//! with a short cyclic period collapses to all-zeros within `n-1` levels,
//! while derivative level `n-1` equal to all-ones signals aperiodicity.
//!
//! Positions are 0-based in code. Error messages report 1-based positions
//! to match the left-to-right text form.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitStringError {
    #[error("empty bit string")]
    Empty,
    #[error("illegal character {found:?} at position {position} (expected '0' or '1')")]
    IllegalChar { position: usize, found: char },
    #[error("bit string of length {len} is too short (need at least 2 bits)")]
    TooShort { len: usize },
    #[error("derivative count {count} out of range 1..={max}")]
    CountOutOfRange { count: usize, max: usize },
    #[error("bit length {bits} does not fit in {bytes} bytes")]
    LengthMismatch { bits: usize, bytes: usize },
}

const WORD_BITS: usize = 64;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Mask selecting the in-range bits of the final word.
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// A finite binary string of positive length.
///
/// Bit `i` (0-based, left-to-right in the text form) is stored at
/// `words[i / 64] >> (i % 64) & 1`. Unused high bits of the last word are
/// always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    /// Parses a string of '0'/'1' characters, left-to-right bit order.
    pub fn from_text(text: &str) -> Result<Self, BitStringError> {
        if text.is_empty() {
            return Err(BitStringError::Empty);
        }
        let mut words = vec![0u64; word_count(text.chars().count())];
        let mut len = 0usize;
        for (i, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS),
                _ => {
                    return Err(BitStringError::IllegalChar {
                        position: i + 1,
                        found: ch,
                    })
                }
            }
            len += 1;
        }
        Ok(BitString { words, len })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self, BitStringError> {
        if bits.is_empty() {
            return Err(BitStringError::Empty);
        }
        let mut words = vec![0u64; word_count(bits.len())];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        Ok(BitString {
            words,
            len: bits.len(),
        })
    }

    /// The `width`-bit binary expansion of `value`, most significant bit
    /// first, so `from_value(5, 4)` is `0101`.
    pub fn from_value(value: u64, width: usize) -> Result<Self, BitStringError> {
        if width == 0 {
            return Err(BitStringError::Empty);
        }
        assert!(width <= 64, "from_value supports widths up to 64");
        let mut b = Builder::new();
        b.push_bits_msb(value, width);
        Ok(b.finish().expect("width > 0"))
    }

    /// Decodes the byte form: most significant bit first within each byte,
    /// bytes in sequence order, with the exact bit length given alongside.
    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Result<Self, BitStringError> {
        if bit_len == 0 {
            return Err(BitStringError::Empty);
        }
        if bit_len > bytes.len() * 8 {
            return Err(BitStringError::LengthMismatch {
                bits: bit_len,
                bytes: bytes.len(),
            });
        }
        let mut words = vec![0u64; word_count(bit_len)];
        for i in 0..bit_len {
            let bit = (bytes[i / 8] >> (7 - i % 8)) & 1;
            if bit == 1 {
                words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        Ok(BitString {
            words,
            len: bit_len,
        })
    }

    /// Encodes to the byte form; the final partial byte is zero-padded.
    /// The receiver must carry `len()` alongside to decode losslessly.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                bytes[i / 8] |= 1 << (7 - i % 8);
            }
        }
        bytes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    /// Bit at 0-based position `i`. Panics if out of range.
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Fraction of ones, the exact rational `count_ones / len` evaluated in
    /// one division.
    pub fn ones_fraction(&self) -> f64 {
        self.count_ones() as f64 / self.len as f64
    }

    pub fn is_all_zeros(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.len
    }

    /// First binary derivative: bit `i` of the result is `s_i XOR s_{i+1}`,
    /// length `n-1`. Requires `n >= 2`.
    pub fn linear_derivative(&self) -> Result<BitString, BitStringError> {
        if self.len < 2 {
            return Err(BitStringError::TooShort { len: self.len });
        }
        let mut out = self.clone();
        out.step_linear_in_place();
        Ok(out)
    }

    /// First binary knot derivative: as [`linear_derivative`] but the last
    /// bit is also XORed with the first, preserving length `n`.
    ///
    /// [`linear_derivative`]: BitString::linear_derivative
    pub fn cyclic_derivative(&self) -> Result<BitString, BitStringError> {
        if self.len < 2 {
            return Err(BitStringError::TooShort { len: self.len });
        }
        let mut out = self.clone();
        out.step_cyclic_in_place();
        Ok(out)
    }

    /// In-place cyclic derivative step. Caller guarantees `len >= 2`.
    pub(crate) fn step_cyclic_in_place(&mut self) {
        debug_assert!(self.len >= 2);
        let first_bit = self.words[0] & 1;
        let m = self.words.len();
        for j in 0..m {
            let next = if j + 1 < m { self.words[j + 1] } else { 0 };
            let shifted = (self.words[j] >> 1) | (next << (WORD_BITS - 1));
            self.words[j] ^= shifted;
        }
        // wraparound pair: position n-1 gets s_{n-1} XOR s_0
        let last = self.len - 1;
        self.words[last / WORD_BITS] ^= first_bit << (last % WORD_BITS);
        debug_assert_eq!(self.words[m - 1] & !tail_mask(self.len), 0);
    }

    /// In-place linear derivative step; shrinks length by one. Caller
    /// guarantees `len >= 2`.
    pub(crate) fn step_linear_in_place(&mut self) {
        debug_assert!(self.len >= 2);
        let m = self.words.len();
        for j in 0..m {
            let next = if j + 1 < m { self.words[j + 1] } else { 0 };
            let shifted = (self.words[j] >> 1) | (next << (WORD_BITS - 1));
            self.words[j] ^= shifted;
        }
        self.len -= 1;
        self.words.truncate(word_count(self.len));
        let m = self.words.len();
        self.words[m - 1] &= tail_mask(self.len);
    }

    /// Cyclic rotation: bit `i` of the result is bit `(i + k) mod n` of
    /// `self`, i.e. the string read starting `k` positions to the right.
    pub fn rotate_left(&self, k: usize) -> BitString {
        let n = self.len;
        let k = k % n;
        if k == 0 {
            return self.clone();
        }
        let mut words = vec![0u64; self.words.len()];
        let mut src = k;
        for i in 0..n {
            if self.get(src) {
                words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
            src += 1;
            if src == n {
                src = 0;
            }
        }
        BitString { words, len: n }
    }

    /// Flips every bit.
    pub fn complement(&self) -> BitString {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let m = words.len();
        words[m - 1] &= tail_mask(self.len);
        BitString {
            words,
            len: self.len,
        }
    }

    /// Mirrors bit positions.
    pub fn reverse(&self) -> BitString {
        let n = self.len;
        let mut words = vec![0u64; self.words.len()];
        for i in 0..n {
            if self.get(n - 1 - i) {
                words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        BitString { words, len: n }
    }

    /// Smallest divisor `p` of `n` with `rotate_left(p) == self`. A constant
    /// string has period 1; an aperiodic string has period `n`.
    pub fn cyclic_period(&self) -> usize {
        let n = self.len;
        for p in 1..=n {
            if n.is_multiple_of(p) && self.rotate_left(p) == *self {
                return p;
            }
        }
        unreachable!("rotation by n is the identity")
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut b = Builder::new();
        for i in 0..self.len {
            b.push_bit(self.get(i));
        }
        for i in 0..other.len {
            b.push_bit(other.get(i));
        }
        b.finish().expect("both operands non-empty")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitString::from_text(s)
    }
}

/// Incremental construction, used by the direction encoders.
#[derive(Default)]
pub struct Builder {
    words: Vec<u64>,
    len: usize,
}

impl Builder {
    pub fn new() -> Self {
        Builder::default()
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD_BITS) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1u64 << (self.len % WORD_BITS);
        }
        self.len += 1;
    }

    /// Pushes the low `width` bits of `value`, most significant first.
    pub fn push_bits_msb(&mut self, value: u64, width: usize) {
        for shift in (0..width).rev() {
            self.push_bit((value >> shift) & 1 == 1);
        }
    }

    pub fn finish(self) -> Result<BitString, BitStringError> {
        if self.len == 0 {
            return Err(BitStringError::Empty);
        }
        Ok(BitString {
            words: self.words,
            len: self.len,
        })
    }
}

/// Which adjacency rule a derivative chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Adjacent pairs only; each level is one bit shorter.
    Linear,
    /// Adjacent pairs including last-with-first; levels keep their length.
    Cyclic,
}

/// A string together with its first `count` binary derivatives.
#[derive(Debug, Clone)]
pub struct DerivativeChain {
    pub mode: DerivativeMode,
    /// `levels[0]` is the string itself; `levels[k]` its k-th derivative.
    pub levels: Vec<BitString>,
    /// Exact fraction of ones at each level.
    pub ones_fractions: Vec<f64>,
}

/// Computes `levels[0..=count]` of the derivative chain of `s`.
/// `count` must lie in `1..=n-1`.
pub fn derivative_chain(
    s: &BitString,
    mode: DerivativeMode,
    count: usize,
) -> Result<DerivativeChain, BitStringError> {
    let n = s.len();
    if n < 2 {
        return Err(BitStringError::TooShort { len: n });
    }
    if count == 0 || count > n - 1 {
        return Err(BitStringError::CountOutOfRange { count, max: n - 1 });
    }
    let mut levels = Vec::with_capacity(count + 1);
    let mut cur = s.clone();
    for _ in 0..count {
        levels.push(cur.clone());
        match mode {
            DerivativeMode::Linear => cur.step_linear_in_place(),
            DerivativeMode::Cyclic => cur.step_cyclic_in_place(),
        }
    }
    levels.push(cur);
    let ones_fractions = levels.iter().map(BitString::ones_fraction).collect();
    Ok(DerivativeChain {
        mode,
        levels,
        ones_fractions,
    })
}

/// What the derivative chain of a string settles into within `n-1` levels.
///
/// Levels 1..=n-1 are scanned. A chain that hits all-zeros stays there, so
/// the first all-zeros level is reported when one exists; all-ones can then
/// only terminate a chain at level `n-1` (one step earlier it would have
/// collapsed to zeros within the scan). Mapping these raw facts onto
/// periodicity labels is left to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainClassification {
    ReachesAllZeros { level: usize },
    ReachesAllOnes { level: usize },
    Neither,
}

pub fn classify_chain(s: &BitString, mode: DerivativeMode) -> ChainClassification {
    let n = s.len();
    if n < 2 {
        return ChainClassification::Neither;
    }
    let mut cur = s.clone();
    let mut last_all_ones = false;
    for level in 1..=n - 1 {
        match mode {
            DerivativeMode::Linear => cur.step_linear_in_place(),
            DerivativeMode::Cyclic => cur.step_cyclic_in_place(),
        }
        if cur.is_all_zeros() {
            return ChainClassification::ReachesAllZeros { level };
        }
        last_all_ones = cur.is_all_ones();
    }
    if last_all_ones {
        ChainClassification::ReachesAllOnes { level: n - 1 }
    } else {
        ChainClassification::Neither
    }
}
