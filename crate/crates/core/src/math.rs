//! Special functions and quadrature used by the laws and curves.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, fabs, lgamma, log};

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..400 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

pub fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    exp(lgamma(a + b) - lgamma(a) - lgamma(b) + (a - 1.0) * log(x) + (b - 1.0) * log(1.0 - x))
}

/// Inverse of [`beta_cdf`] by safeguarded Newton iteration.
pub fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = a / (a + b);
    for _ in 0..200 {
        let f = beta_cdf(a, b, x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo < 1e-15 {
            break;
        }
        let pdf = beta_pdf(a, b, x);
        let mut next = if pdf > 0.0 { x - f / pdf } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if fabs(next - x) < 1e-16 {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// CDF of Binomial(n, p) at each `k = 0..=n`; the last entry is exactly 1.
pub fn binomial_cdf_table(n: u32, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    for k in 0..=n {
        acc += binomial(n, k) * libm::pow(p, k as f64) * libm::pow(q, (n - k) as f64);
        out.push(if k == n { 1.0 } else { acc.min(1.0) });
    }
    out
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; m];
    let mut weights = alloc::vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..m {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = m as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if fabs(z - z1) < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫_a^b g` with an `m`-point Gauss-Legendre rule (exact for polynomials of degree < 2m).
pub fn integrate<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, m: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| wi * g(mid + half * xi)).sum::<f64>() * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_cdf_closed_forms() {
        for &x in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            assert!((beta_cdf(1.0, 1.0, x) - x).abs() < 1e-13);
            let b22 = 3.0 * x * x - 2.0 * x * x * x;
            assert!((beta_cdf(2.0, 2.0, x) - b22).abs() < 1e-13);
            assert!((beta_cdf(5.0, 1.0, x) - x.powi(5)).abs() < 1e-13);
        }
    }

    #[test]
    fn beta_quantile_inverts() {
        for &(a, b) in &[(2.0, 2.0), (5.0, 1.0), (0.5, 0.5), (3.0, 7.0)] {
            for &p in &[1e-6, 0.01, 0.25, 0.5, 0.9, 0.999999] {
                let x = beta_quantile(a, b, p);
                // resolution of the CDF near x is pdf(x) times the spacing of doubles
                let tol = 1e-12 + beta_pdf(a, b, x) * 4.0 * f64::EPSILON;
                assert!((beta_cdf(a, b, x) - p).abs() < tol, "{a} {b} {p}");
            }
        }
    }

    #[test]
    fn binomial_table() {
        let t = binomial_cdf_table(2, 0.5);
        assert_eq!(t, alloc::vec![0.25, 0.75, 1.0]);
        let t = binomial_cdf_table(2, 1.0);
        assert_eq!(t, alloc::vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn quadrature_exact_for_polynomials() {
        let v = integrate(|x| x * x * x * x * x - 2.0 * x, 0.0, 2.0, 3);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let v = integrate(|x| libm::exp(x), 0.0, 1.0, 12);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-14);
    }
}
