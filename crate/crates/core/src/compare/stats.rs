use serde::Serialize;

use crate::{Error, Result};

pub const PERCENTILE_POINTS: [u8; 9] = [1, 5, 10, 25, 50, 75, 90, 95, 99];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionStats {
    pub obs: usize,
    pub mean: f64,
    /// Square root of the sample (n − 1) variance.
    pub std_dev: f64,
    pub variance: f64,
    /// `m₃/m₂^1.5` from population moments; `None` when `m₂ = 0`.
    pub skewness: Option<f64>,
    /// Non-excess `m₄/m₂²`; `None` when `m₂ = 0`.
    pub kurtosis: Option<f64>,
    /// `(point, value)` for each of [`PERCENTILE_POINTS`].
    pub percentiles: Vec<(u8, f64)>,
    pub max: f64,
}

impl DistributionStats {
    pub fn percentile(&self, point: u8) -> Option<f64> {
        self.percentiles.iter().find(|(p, _)| *p == point).map(|(_, v)| *v)
    }
}

/// Linear interpolation between closest ranks: the value at position
/// `(n − 1)·p/100` of the sorted sample.
pub fn percentile_of_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(percentile_of_sorted(&v, 50.0))
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn distribution_stats(values: &[f64]) -> Result<DistributionStats> {
    if values.is_empty() {
        return Err(Error::invalid("distribution", "no values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("distribution", "non-finite value"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let ss = m2;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let variance = if values.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    let (skewness, kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DistributionStats {
        obs: values.len(),
        mean,
        std_dev: variance.sqrt(),
        variance,
        skewness,
        kurtosis,
        percentiles: PERCENTILE_POINTS
            .iter()
            .map(|&p| (p, percentile_of_sorted(&sorted, p as f64)))
            .collect(),
        max: sorted[sorted.len() - 1],
    })
}

/// Pearson correlation; `None` with fewer than two pairs or a constant side.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "paired samples differ in length");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks in ascending order; tied values share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// `1 − 6·Σd²/(n(n² − 1))`; equals [`spearman`] when neither side has ties.
pub fn spearman_from_rank_differences(differences: &[i64]) -> Option<f64> {
    let n = differences.len() as f64;
    if differences.len() < 2 {
        return None;
    }
    let d2: f64 = differences.iter().map(|d| (d * d) as f64).sum();
    Some(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_three_points() {
        let s = distribution_stats(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.skewness, Some(0.0));
        assert!((s.kurtosis.unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(s.variance, 1.0);
        assert_eq!(s.percentile(50), Some(0.0));
    }

    #[test]
    fn constant_vector() {
        let s = distribution_stats(&[2.0; 5]).unwrap();
        assert_eq!((s.std_dev, s.skewness, s.kurtosis), (0.0, None, None));
        assert_eq!(s.max, 2.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(distribution_stats(&[]).is_err());
    }

    #[test]
    fn percentile_interpolation() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile_of_sorted(&v, 50.0), 2.5);
        assert_eq!(percentile_of_sorted(&v, 25.0), 1.75);
        assert_eq!(percentile_of_sorted(&v, 100.0), 4.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), Some(3.0));
    }

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(pearson(&x, &x), Some(1.0));
        assert_eq!(spearman(&x, &x), Some(1.0));
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_eq!(spearman(&x, &rev), Some(-1.0));
        assert_eq!(pearson(&x, &[1.0; 5]), None);
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), [1.5, 3.0, 1.5, 4.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn spearman_identity_without_ties(perm in Just((1..=30i64).collect::<Vec<_>>()).prop_shuffle()) {
            let a: Vec<f64> = (1..=30).map(|r| r as f64).collect();
            let b: Vec<f64> = perm.iter().map(|&r| r as f64).collect();
            let d: Vec<i64> = perm.iter().zip(1..=30i64).map(|(p, r)| p - r).collect();
            let direct = spearman(&a, &b).unwrap();
            let identity = spearman_from_rank_differences(&d).unwrap();
            prop_assert!((direct - identity).abs() < 1e-12);
        }

        #[test]
        fn stats_invariants(v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
            let s = distribution_stats(&v).unwrap();
            prop_assert!((s.variance - s.std_dev * s.std_dev).abs() <= 1e-9 * s.variance.max(1.0));
            prop_assert!(s.percentiles.windows(2).all(|w| w[0].1 <= w[1].1));
            prop_assert!(s.max >= s.percentile(99).unwrap());
            prop_assert_eq!(s.percentile(50), median(&v));
        }
    }
}
