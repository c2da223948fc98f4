//! Deterministic synthetic bf16 streams with controlled exponent statistics.
//!
//! Ranks map to exponent values center-out around 0x7C (a typical peak for
//! normalized activations): rank 0 is 0x7C, then 0x7B, 0x7D, 0x7A, 0x7E and
//! so on. Probability mass therefore concentrates in a narrow numeric band,
//! the shape real tensors show. Signs are fair coin flips and mantissas
//! uniform 7-bit noise; only the exponent marginal is shaped.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bf16::Bf16Triple;
use crate::error::{Error, Result};

const CENTER_EXPONENT: i32 = 0x7C;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthDistribution {
    /// Rank r gets mass proportional to (r+1)^-s.
    Zipf { s: f64 },
    /// Rank r gets mass proportional to ratio^r, 0 < ratio <= 1.
    Geometric { ratio: f64 },
    Uniform,
}

/// Exponent value for each probability rank, most probable first.
pub fn center_out_exponents(distinct: usize) -> Result<Vec<u8>> {
    if distinct == 0 || distinct > 256 {
        return Err(Error::InvalidInput {
            detail: format!("distinct exponent count {distinct} not in 1..=256"),
        });
    }
    let mut out = Vec::with_capacity(distinct);
    out.push(CENTER_EXPONENT as u8);
    let mut lo = CENTER_EXPONENT - 1;
    let mut hi = CENTER_EXPONENT + 1;
    while out.len() < distinct {
        if lo >= 0 && out.len() < distinct {
            out.push(lo as u8);
            lo -= 1;
        }
        if hi <= 255 && out.len() < distinct {
            out.push(hi as u8);
            hi += 1;
        }
    }
    Ok(out)
}

/// Normalized rank probabilities for a distribution over `distinct` ranks.
pub fn rank_probabilities(dist: SynthDistribution, distinct: usize) -> Result<Vec<f64>> {
    if distinct == 0 || distinct > 256 {
        return Err(Error::InvalidInput {
            detail: format!("distinct exponent count {distinct} not in 1..=256"),
        });
    }
    let weights: Vec<f64> = match dist {
        SynthDistribution::Zipf { s } => {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::InvalidInput {
                    detail: format!("zipf exponent must be finite and nonnegative, got {s}"),
                });
            }
            (0..distinct).map(|r| ((r + 1) as f64).powf(-s)).collect()
        }
        SynthDistribution::Geometric { ratio } => {
            if !ratio.is_finite() || ratio <= 0.0 || ratio > 1.0 {
                return Err(Error::InvalidInput {
                    detail: format!("geometric ratio must be in (0, 1], got {ratio}"),
                });
            }
            let mut w = Vec::with_capacity(distinct);
            let mut cur = 1.0;
            for _ in 0..distinct {
                w.push(cur);
                cur *= ratio;
            }
            w
        }
        SynthDistribution::Uniform => vec![1.0; distinct],
    };
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Shannon entropy of a probability vector in bits.
pub fn distribution_entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Solves for the geometric ratio whose truncated distribution over
/// `distinct` ranks has the given entropy. Entropy rises continuously from 0
/// (ratio near 0) to log2(distinct) (ratio 1), so bisection converges.
pub fn geometric_ratio_for_entropy(target_bits: f64, distinct: usize) -> Result<f64> {
    let max = (distinct as f64).log2();
    if !(target_bits > 0.0 && target_bits <= max) {
        return Err(Error::InvalidInput {
            detail: format!(
                "entropy target {target_bits} outside (0, {max}] for {distinct} ranks"
            ),
        });
    }
    let entropy_at = |r: f64| {
        let probs = rank_probabilities(SynthDistribution::Geometric { ratio: r }, distinct)
            .expect("ratio stays in range during bisection");
        distribution_entropy_bits(&probs)
    };
    let (mut lo, mut hi) = (1e-12, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy_at(mid) < target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generates `count` bf16 words with the given exponent rank distribution.
pub fn generate_bf16(
    dist: SynthDistribution,
    distinct: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<u16>> {
    let exponents = center_out_exponents(distinct)?;
    let probs = rank_probabilities(dist, distinct)?;
    let index = WeightedIndex::new(&probs).map_err(|e| Error::InvalidInput {
        detail: format!("bad rank weights: {e}"),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let triple = Bf16Triple {
                sign: rng.gen_bool(0.5),
                exponent: exponents[index.sample(&mut rng)],
                mantissa: rng.gen_range(0..128),
            };
            triple.join()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bf16::{entropy_bits, exponent_counts};

    #[test]
    fn ranks_spiral_out_from_the_center() {
        let exps = center_out_exponents(8).unwrap();
        assert_eq!(exps, vec![0x7C, 0x7B, 0x7D, 0x7A, 0x7E, 0x79, 0x7F, 0x78]);
        assert_eq!(center_out_exponents(1).unwrap(), vec![0x7C]);
        let all = center_out_exponents(256).unwrap();
        let mut seen = [false; 256];
        for e in all {
            assert!(!seen[e as usize]);
            seen[e as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert!(center_out_exponents(0).is_err());
        assert!(center_out_exponents(257).is_err());
    }

    #[test]
    fn zipf_mass_follows_the_power_law() {
        let probs = rank_probabilities(SynthDistribution::Zipf { s: 1.0 }, 8).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((probs[0] / probs[1] - 2.0).abs() < 1e-12);
        assert!((probs[0] / probs[3] - 4.0).abs() < 1e-12);
        let flat = rank_probabilities(SynthDistribution::Zipf { s: 0.0 }, 8).unwrap();
        let uniform = rank_probabilities(SynthDistribution::Uniform, 8).unwrap();
        assert_eq!(flat, uniform);
    }

    #[test]
    fn uniform_entropy_is_log2_of_the_support() {
        let probs = rank_probabilities(SynthDistribution::Uniform, 32).unwrap();
        assert!((distribution_entropy_bits(&probs) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_hits_the_entropy_target() {
        for (target, distinct) in [(2.56, 32), (1.0, 32), (4.9, 32), (2.0, 8)] {
            let ratio = geometric_ratio_for_entropy(target, distinct).unwrap();
            assert!(ratio > 0.0 && ratio < 1.0);
            let probs =
                rank_probabilities(SynthDistribution::Geometric { ratio }, distinct).unwrap();
            let got = distribution_entropy_bits(&probs);
            assert!((got - target).abs() < 1e-6, "target {target} got {got}");
        }
        assert!(geometric_ratio_for_entropy(6.0, 32).is_err());
        assert!(geometric_ratio_for_entropy(0.0, 32).is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let dist = SynthDistribution::Zipf { s: 1.2 };
        let a = generate_bf16(dist, 16, 1000, 9).unwrap();
        let b = generate_bf16(dist, 16, 1000, 9).unwrap();
        let c = generate_bf16(dist, 16, 1000, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_exponents_stay_in_the_rank_set_and_fields_mix() {
        let values =
            generate_bf16(SynthDistribution::Geometric { ratio: 0.7 }, 12, 20_000, 3).unwrap();
        let allowed = center_out_exponents(12).unwrap();
        let mut signs = [false; 2];
        for &v in &values {
            let t = Bf16Triple::split(v);
            assert!(allowed.contains(&t.exponent));
            assert!(t.mantissa < 128);
            signs[t.sign as usize] = true;
        }
        assert!(signs[0] && signs[1]);
    }

    #[test]
    fn empirical_entropy_tracks_the_design_target() {
        let target = 2.56;
        let ratio = geometric_ratio_for_entropy(target, 32).unwrap();
        let values =
            generate_bf16(SynthDistribution::Geometric { ratio }, 32, 200_000, 42).unwrap();
        let counts = exponent_counts(&values);
        let got = entropy_bits(&counts);
        assert!((got - target).abs() < 0.03, "empirical entropy {got}");
    }
}
