//! Summary statistics, confidence intervals and goodness-of-fit tests.

use alloc::vec::Vec;

use libm::{exp, sqrt};

/// Pairwise (cascade) summation; the result does not depend on how replicas
/// were scheduled, only on their order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean with a normal-approximation 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub sd: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn of(xs: &[f64]) -> MeanCi {
        let n = xs.len();
        if n == 0 {
            return MeanCi { mean: f64::NAN, sd: f64::NAN, half_width: f64::NAN, n };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        let sd = sqrt(var);
        MeanCi { mean, sd, half_width: 1.96 * sd / sqrt(n as f64), n }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        self.sd / sqrt(self.n as f64)
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = sign * exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS distance of `sample` against a continuous `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s: Vec<f64> = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample KS statistic and asymptotic p-value. Ties are handled by
/// advancing both empirical CDFs past equal values before comparing.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sq = sqrt(ne);
    (d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d))
}

/// Pool-adjacent-violators fit of a non-increasing sequence.
pub fn isotonic_non_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    // blocks of (weighted mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            let m = if w > 0.0 { (m1 * w1 + m2 * w2) / w } else { 0.5 * (m1 + m2) };
            *blocks.last_mut().unwrap() = (m, w, l1 + l2);
        }
    }
    blocks.iter().flat_map(|&(m, _, l)| core::iter::repeat_n(m, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn mean_ci_basic() {
        let c = MeanCi::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(c.mean, 2.5);
        assert!((c.sd - 1.2909944487358056).abs() < 1e-12);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson(30, 100, 1.96);
        assert!(lo < 0.3 && hi > 0.3);
        let (lo, hi) = wilson(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn kolmogorov_tail_reference_points() {
        // classical critical values: P(K > 1.358) = 0.05, P(K > 1.628) = 0.01
        assert!((kolmogorov_tail(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_tail(1.628) - 0.01).abs() < 2e-4);
    }

    #[test]
    fn ks_two_sample_same_law_accepts() {
        let mut r = Stream::new(3).rng();
        let a: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        let b: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01);
        let c: Vec<f64> = (0..5000).map(|_| r.uniform().sqrt()).collect();
        let (_, p) = ks_two_sample(&a, &c);
        assert!(p < 1e-6);
    }

    #[test]
    fn ks_two_sample_handles_ties() {
        let a = [0.0, 0.0, 0.0, 1.0];
        let b = [0.0, 0.0, 0.0, 1.0];
        assert_eq!(ks_two_sample(&a, &b).0, 0.0);
    }

    #[test]
    fn pava() {
        let fit = isotonic_non_increasing(&[1.0, 0.8, 0.9, 0.5, 0.6, 0.1], &[1.0; 6]);
        assert_eq!(fit.len(), 6);
        for w in fit.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!((fit[1] - 0.85).abs() < 1e-12 && (fit[2] - 0.85).abs() < 1e-12);
        assert!((fit[3] - 0.55).abs() < 1e-12);
    }
}
