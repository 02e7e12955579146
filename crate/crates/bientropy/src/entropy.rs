//! Shannon entropy and the weighted BiEntropy family.
//!
//! The BiEntropy of a string is a weighted average of the Shannon binary
//! entropies of the string and its first `n-2` binary derivatives:
//!
//! ```text
//! value = sum_{k=0}^{n-2} weight(k) * H(p(k))  /  sum_{k=0}^{n-2} weight(k)
//! ```
//!
//! where `p(k)` is the fraction of ones in derivative level `k` and
//! `H(p) = -p log2 p - (1-p) log2 (1-p)`. Derivative level `n-1` is computed
//! and exposed, as its terminal state is the chain's periodicity verdict,
//! but it is never weighted. Levels may be taken in linear mode (each level
//! one bit shorter) or cyclic mode (levels keep length `n`); the cyclic
//! variant is invariant under rotation of the input, which makes it the
//! right measure for closed loops encoded as bit strings.
//!
//! Four weightings are provided, with the conventional short names
//! `BiEn` (power-of-two), `TBiEn` (logarithmic), `LBiEn` (linear) and
//! `PBiEn` (zero weights, i.e. plain Shannon entropy of the string).
//! Prefixing `K` (e.g. `KTBiEn`) denotes the cyclic mode.

use thiserror::Error;

use crate::bitstring::{BitString, DerivativeMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("bit string of length {len} is too short (need at least 2 bits)")]
    TooShort { len: usize },
    #[error("probability {p} outside [0, 1]")]
    InvalidProbability { p: f64 },
    #[error("table width {width} outside supported range 2..=20")]
    WidthOutOfRange { width: usize },
}

/// How the per-level Shannon entropies are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// `weight(k) = 2^k`: the last used derivative dominates. Weights are
    /// evaluated relative to the dominant one (`2^(k-(n-2))`) so the
    /// normalizer `2^(n-1) - 1` never overflows; for `n` beyond ~64 the
    /// early levels underflow the 53-bit significand and the value
    /// approaches the entropy of the final weighted levels. Suited to
    /// short strings.
    PowerOfTwo,
    /// `weight(k) = log2(k+2)`: every level of an arbitrarily long string
    /// retains influence. Suited to long strings.
    Logarithmic,
    /// `weight(k) = k+1`, normalized by `sum (k+1) = n(n-1)/2`.
    Linear,
    /// `weight(0) = 1` and zero elsewhere: only the string itself counts,
    /// giving the plain Shannon entropy of the ones fraction.
    Zero,
}

impl WeightScheme {
    /// Weight of derivative level `k` for a string of length `n`.
    pub fn weight(self, k: usize, n: usize) -> f64 {
        debug_assert!(n >= 2 && k <= n - 2);
        match self {
            WeightScheme::PowerOfTwo => (k as f64 - (n - 2) as f64).exp2(),
            WeightScheme::Logarithmic => ((k + 2) as f64).log2(),
            WeightScheme::Linear => (k + 1) as f64,
            WeightScheme::Zero => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Shannon binary entropy `H(p)`, with `0 log2 0` defined to be 0.
pub fn shannon(p: f64) -> Result<f64, EntropyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EntropyError::InvalidProbability { p });
    }
    fn term(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            -x * x.log2()
        }
    }
    Ok(term(p) + term(1.0 - p))
}

/// `H(ones / len)` evaluated from the exact counts.
///
/// Both entropy terms are derived from integer counts, so complementing a
/// string (swapping the counts) reorders the same two summands and the
/// result is bit-identical, not merely close.
pub fn shannon_from_counts(ones: usize, len: usize) -> f64 {
    debug_assert!(ones <= len && len > 0);
    fn term(count: usize, len: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            let p = count as f64 / len as f64;
            -p * p.log2()
        }
    }
    term(ones, len) + term(len - ones, len)
}

/// One row of a BiEntropy computation.
#[derive(Debug, Clone)]
pub struct LevelTrace {
    /// Derivative level `k`.
    pub level: usize,
    pub ones: usize,
    pub len: usize,
    /// `p(k)`, the exact ones fraction.
    pub ones_fraction: f64,
    /// `H(p(k))`.
    pub shannon: f64,
    pub weight: f64,
    /// `weight * shannon`, as accumulated into the total.
    pub weighted: f64,
}

/// A BiEntropy value together with the per-level working.
#[derive(Debug, Clone)]
pub struct BiEntropyResult {
    /// The weighted average, in `[0, 1]`.
    pub value: f64,
    pub mode: DerivativeMode,
    pub scheme: WeightScheme,
    /// Levels `0..=n-2`, the ones that carry weight.
    pub per_level: Vec<LevelTrace>,
    /// Sum of the weights (the normalizer).
    pub weight_sum: f64,
    /// Sum of the weighted entropies.
    pub weighted_sum: f64,
    /// Derivative level `n-1`, computed but never weighted.
    pub final_derivative: BitString,
}

/// Computes the BiEntropy of `s` in the given mode and weighting.
/// Requires `n >= 2`.
pub fn bientropy(
    s: &BitString,
    mode: DerivativeMode,
    scheme: WeightScheme,
) -> Result<BiEntropyResult, EntropyError> {
    let n = s.len();
    if n < 2 {
        return Err(EntropyError::TooShort { len: n });
    }
    let mut cur = s.clone();
    let mut per_level = Vec::with_capacity(n - 1);
    let mut weight_sum = 0.0f64;
    let mut weighted_sum = 0.0f64;
    for k in 0..=n - 2 {
        let ones = cur.count_ones();
        let len = cur.len();
        let h = shannon_from_counts(ones, len);
        let w = scheme.weight(k, n);
        let wh = w * h;
        weight_sum += w;
        weighted_sum += wh;
        per_level.push(LevelTrace {
            level: k,
            ones,
            len,
            ones_fraction: ones as f64 / len as f64,
            shannon: h,
            weight: w,
            weighted: wh,
        });
        match mode {
            DerivativeMode::Linear => cur.step_linear_in_place(),
            DerivativeMode::Cyclic => cur.step_cyclic_in_place(),
        }
    }
    Ok(BiEntropyResult {
        value: weighted_sum / weight_sum,
        mode,
        scheme,
        per_level,
        weight_sum,
        weighted_sum,
        final_derivative: cur,
    })
}

/// BiEn: linear mode, power-of-two weights.
pub fn bien(s: &BitString) -> Result<f64, EntropyError> {
    Ok(bientropy(s, DerivativeMode::Linear, WeightScheme::PowerOfTwo)?.value)
}

/// TBiEn: linear mode, logarithmic weights.
pub fn tbien(s: &BitString) -> Result<f64, EntropyError> {
    Ok(bientropy(s, DerivativeMode::Linear, WeightScheme::Logarithmic)?.value)
}

/// KBiEn: cyclic (knot) mode, power-of-two weights.
pub fn kbien(s: &BitString) -> Result<f64, EntropyError> {
    Ok(bientropy(s, DerivativeMode::Cyclic, WeightScheme::PowerOfTwo)?.value)
}

/// KTBiEn: cyclic (knot) mode, logarithmic weights.
pub fn ktbien(s: &BitString) -> Result<f64, EntropyError> {
    Ok(bientropy(s, DerivativeMode::Cyclic, WeightScheme::Logarithmic)?.value)
}

/// KTBiEn of every string of the given width, in numeric order of the
/// strings read as big-endian integers. Guarded to widths `2..=20` since
/// the enumeration is exhaustive.
pub fn ktbien_table(width: usize) -> Result<Vec<(BitString, f64)>, EntropyError> {
    if !(2..=20).contains(&width) {
        return Err(EntropyError::WidthOutOfRange { width });
    }
    let mut out = Vec::with_capacity(1 << width);
    for value in 0..(1u64 << width) {
        let s = BitString::from_value(value, width).expect("width >= 2");
        let v = ktbien(&s)?;
        out.push((s, v));
    }
    Ok(out)
}
