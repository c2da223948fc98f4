//! BF16 bit-field access and per-field entropy profiling.
//!
//! A BF16 word is 1 sign bit, 8 exponent bits, 7 mantissa bits. Nothing here
//! interprets the value numerically: NaN and infinity patterns are ordinary
//! symbols, which is what makes the downstream codec lossless on arbitrary
//! tensors.

use crate::error::{Error, Result};

/// The three fields of a BF16 word, kept as raw bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bf16Triple {
    pub sign: bool,
    pub exponent: u8,
    /// Only the low 7 bits are meaningful; `join` rejects values above 0x7F.
    pub mantissa: u8,
}

impl Bf16Triple {
    /// Splits a raw BF16 word into (sign, exponent, mantissa).
    #[inline]
    pub fn split(bits: u16) -> Self {
        Bf16Triple {
            sign: bits & 0x8000 != 0,
            exponent: ((bits >> 7) & 0xFF) as u8,
            mantissa: (bits & 0x7F) as u8,
        }
    }

    /// Reassembles the BF16 word. The mantissa must fit in 7 bits.
    #[inline]
    pub fn join(self) -> u16 {
        assert!(
            self.mantissa <= 0x7F,
            "mantissa {:#x} does not fit in 7 bits",
            self.mantissa
        );
        ((self.sign as u16) << 15) | ((self.exponent as u16) << 7) | self.mantissa as u16
    }
}

/// Shannon entropies of the three BF16 fields over a stream.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldEntropyReport {
    pub sign_entropy_bits: f64,
    pub exponent_entropy_bits: f64,
    pub mantissa_entropy_bits: f64,
    pub distinct_exponents: usize,
    pub total_values: u64,
}

/// Shannon entropy in bits of a histogram; zero-count bins contribute nothing.
pub fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Counts exponent occurrences over a stream of raw BF16 words.
pub fn exponent_counts(values: &[u16]) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &v in values {
        counts[Bf16Triple::split(v).exponent as usize] += 1;
    }
    counts
}

/// Per-field entropy profile of a BF16 stream. Errors on an empty stream
/// because entropy of nothing is undefined.
pub fn profile_stream(values: &[u16]) -> Result<FieldEntropyReport> {
    if values.is_empty() {
        return Err(Error::EmptyInput("profile_stream"));
    }
    let mut sign = [0u64; 2];
    let mut exp = [0u64; 256];
    let mut mant = [0u64; 128];
    for &v in values {
        let t = Bf16Triple::split(v);
        sign[t.sign as usize] += 1;
        exp[t.exponent as usize] += 1;
        mant[t.mantissa as usize] += 1;
    }
    Ok(FieldEntropyReport {
        sign_entropy_bits: entropy_bits(&sign),
        exponent_entropy_bits: entropy_bits(&exp),
        mantissa_entropy_bits: entropy_bits(&mant),
        distinct_exponents: exp.iter().filter(|&&c| c > 0).count(),
        total_values: values.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_one_point_zero() {
        let t = Bf16Triple::split(0x3F80);
        assert!(!t.sign);
        assert_eq!(t.exponent, 0x7F);
        assert_eq!(t.mantissa, 0);
    }

    #[test]
    fn split_negative_with_fields_set() {
        let t = Bf16Triple::split(0xC2F7);
        assert!(t.sign);
        assert_eq!(t.exponent, 0x85);
        assert_eq!(t.mantissa, 0x77);
    }

    #[test]
    fn join_after_split_is_identity_for_every_word() {
        for bits in 0..=u16::MAX {
            assert_eq!(Bf16Triple::split(bits).join(), bits);
        }
    }

    #[test]
    #[should_panic(expected = "does not fit in 7 bits")]
    fn join_rejects_oversized_mantissa() {
        Bf16Triple {
            sign: false,
            exponent: 0,
            mantissa: 0x80,
        }
        .join();
    }

    #[test]
    fn identical_stream_has_zero_exponent_entropy() {
        let values = vec![0x3F80u16; 1000];
        let r = profile_stream(&values).unwrap();
        assert_eq!(r.exponent_entropy_bits, 0.0);
        assert_eq!(r.distinct_exponents, 1);
        assert_eq!(r.total_values, 1000);
    }

    #[test]
    fn uniform_eight_exponents_is_three_bits() {
        let mut values = Vec::new();
        for e in 0x78u16..0x80 {
            for _ in 0..100 {
                values.push(e << 7);
            }
        }
        let r = profile_stream(&values).unwrap();
        assert!((r.exponent_entropy_bits - 3.0).abs() < 1e-12);
        assert_eq!(r.distinct_exponents, 8);
    }

    #[test]
    fn nan_and_inf_patterns_are_ordinary_symbols() {
        // Exponent 0xFF with any mantissa profiles like any other bit pattern.
        let values = vec![0x7F80, 0x7FC0, 0xFF80, 0x7F81];
        let r = profile_stream(&values).unwrap();
        assert_eq!(r.distinct_exponents, 1);
        assert_eq!(r.exponent_entropy_bits, 0.0);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(
            profile_stream(&[]),
            Err(Error::EmptyInput("profile_stream"))
        ));
    }

    // Oracle: H = log2(n) - (1/n) * sum(c * log2(c)), an algebraically
    // different route to the same quantity.
    fn entropy_oracle(counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        let n = n as f64;
        let s: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64 * (c as f64).log2())
            .sum();
        n.log2() - s / n
    }

    #[test]
    fn entropy_matches_independent_formula() {
        let cases: Vec<Vec<u64>> = vec![
            vec![1, 1, 1, 1],
            vec![512],
            vec![300, 200, 100, 50, 25, 12, 6, 3],
            vec![0, 7, 0, 13, 0, 1, 0, 979],
            vec![1; 256],
        ];
        for counts in cases {
            let got = entropy_bits(&counts);
            let want = entropy_oracle(&counts);
            assert!(
                (got - want).abs() < 1e-10,
                "counts {counts:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn entropy_of_empty_histogram_is_zero() {
        assert_eq!(entropy_bits(&[0, 0, 0]), 0.0);
    }
}
