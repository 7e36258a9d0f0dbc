//! Set and distribution comparison measures.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `|A ∩ B| / |A ∪ B|`. Two empty sets count as identical (1).
pub fn jaccard<S: Scalar, T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> S {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        S::one()
    } else {
        S::from_usize_lossy(inter) / S::from_usize_lossy(union)
    }
}

fn sum_tolerance<S: Scalar>(len: usize) -> S {
    let floor = S::from_f64_lossy(1e-9);
    let rounding = S::epsilon() * S::from_usize_lossy(4 * len.max(1));
    floor.max(rounding)
}

fn check_distribution<S: Scalar>(p: &[S], name: &str) -> Result<()> {
    if p.iter().any(|v| !v.is_finite() || *v < S::zero()) {
        return Err(Error::InvalidInput(format!("{name} has a negative or non-finite mass")));
    }
    let total: S = p.iter().copied().sum();
    if (total - S::one()).abs() > sum_tolerance::<S>(p.len()) {
        return Err(Error::InvalidInput(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

/// Normalizes counts to a distribution. All-zero counts give all zeros.
pub fn normalize<S: Scalar>(counts: &[usize]) -> Vec<S> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![S::zero(); counts.len()];
    }
    let total = S::from_usize_lossy(total);
    counts.iter().map(|&c| S::from_usize_lossy(c) / total).collect()
}

/// `(1/√2)·√Σ(√pᵢ − √qᵢ)²`, in `[0, 1]`.
pub fn hellinger<S: Scalar>(p: &[S], q: &[S]) -> Result<S> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    let sq: S = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    let two = S::one() + S::one();
    Ok((sq / two).sqrt().min(S::one()))
}

/// `Σ pᵢ ln(pᵢ / q'ᵢ)` where `q' = (q + ε) / Σ(q + ε)`. Natural log.
pub fn kl_divergence<S: Scalar>(p: &[S], q: &[S], epsilon: S) -> Result<S> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    if epsilon.is_nan() || epsilon <= S::zero() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    check_distribution(p, "p")?;
    let smoothed_total: S = q.iter().map(|&v| v + epsilon).sum();
    let kl: S = p
        .iter()
        .zip(q)
        .filter(|(a, _)| **a > S::zero())
        .map(|(&a, &b)| a * (a / ((b + epsilon) / smoothed_total)).ln())
        .sum();
    // Gibbs: negative only through rounding
    Ok(kl.max(S::zero()))
}

/// Shannon entropy in bits of a frequency table; zero counts are ignored.
pub fn entropy_bits<S: Scalar>(counts: &[usize]) -> S {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return S::zero();
    }
    let total = S::from_usize_lossy(total);
    let h: S = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = S::from_usize_lossy(c) / total;
            -p * p.log2()
        })
        .sum();
    h.max(S::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[&'static str]) -> BTreeSet<&'static str> {
        items.iter().copied().collect()
    }

    #[test]
    fn jaccard_examples() {
        let abc = set(&["a", "b", "c"]);
        assert_eq!(jaccard::<f64, _>(&abc, &abc), 1.0);
        assert_eq!(jaccard::<f64, _>(&abc, &set(&["x"])), 0.0);
        assert!((jaccard::<f64, _>(&abc, &set(&["b", "c", "d"])) - 0.5).abs() < 1e-15);
        assert_eq!(jaccard::<f32, &str>(&set(&[]), &set(&[])), 1.0);
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(hellinger(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((hellinger::<f64>(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        // (1/√2)·√((1 − √½)² + ½)
        let expected = ((1.0 - 0.5f64.sqrt()).powi(2) + 0.5).sqrt() / 2f64.sqrt();
        let h = hellinger(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 0.541196).abs() < 1e-6);
        assert!(hellinger(&[0.5, 0.4], &[0.5, 0.5]).is_err());
        assert!(hellinger(&[1.0f32], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn kl_examples() {
        assert!(kl_divergence(&[0.25, 0.75], &[0.25, 0.75], 1e-10).unwrap() < 1e-9);
        let v = kl_divergence(&[1.0, 0.0], &[0.5, 0.5], 1e-10).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-9);
        assert!(kl_divergence(&[1.0], &[1.0], 0.0).is_err());
        // disjoint support stays finite after smoothing
        assert!(kl_divergence::<f64>(&[1.0, 0.0], &[0.0, 1.0], 1e-10).unwrap().is_finite());
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy_bits::<f64>(&[1; 8]) - 3.0).abs() < 1e-12);
        assert_eq!(entropy_bits::<f64>(&[5]), 0.0);
        assert!((entropy_bits::<f64>(&[2, 1, 1]) - 1.5).abs() < 1e-12);
        assert_eq!(entropy_bits::<f64>(&[]), 0.0);
    }

    fn dist(raw: &[u32]) -> Vec<f64> {
        let total: u32 = raw.iter().sum();
        raw.iter().map(|&v| f64::from(v) / f64::from(total)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn kl_non_negative_and_hellinger_bounded(
            pairs in prop::collection::vec((0u32..50, 0u32..50), 1..12)
        ) {
            let (a, b): (Vec<u32>, Vec<u32>) = pairs.into_iter().unzip();
            prop_assume!(a.iter().sum::<u32>() > 0 && b.iter().sum::<u32>() > 0);
            let (p, q) = (dist(&a), dist(&b));
            prop_assert!(kl_divergence(&p, &q, 1e-10).unwrap() >= 0.0);
            let h = hellinger(&p, &q).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            prop_assert!((h - hellinger(&q, &p).unwrap()).abs() < 1e-12);
        }
    }
}
