//! Parameter laws used by the contact models: within-day offset laws for the
//! perturbed lattice, renewal inter-arrival laws and spacing mixtures for
//! shifted lattices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log, log1p, sqrt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Serde adapter for `f64` values that may be `+inf`, written as `"inf"`.
pub mod ext_f64 {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr<'a> {
        Num(f64),
        Str(&'a str),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str("inf") | Repr::Str("infinity") => Ok(f64::INFINITY),
            Repr::Str(other) => Err(D::Error::custom(alloc::format!("expected number or \"inf\", got {other:?}"))),
        }
    }
}

/// Largest double below one; quantiles are clamped to `[0, ONE_MINUS]` so a
/// within-day offset never lands on the next day boundary.
pub const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

/// Atom-free law on `[0, 1)` for the within-day contact offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AtomFreeLaw {
    Uniform01,
    Beta { a: f64, b: f64 },
    /// Continuous piecewise-linear CDF through `(u, F(u))` knots, from
    /// `(0, 0)` to `(1, 1)` with strictly increasing coordinates.
    PiecewiseCdf { knots: Vec<(f64, f64)> },
}

impl AtomFreeLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            AtomFreeLaw::Uniform01 => Ok(()),
            AtomFreeLaw::Beta { a, b } => {
                if *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!("beta parameters must be positive, got ({a}, {b})")))
                }
            }
            AtomFreeLaw::PiecewiseCdf { knots } => {
                let ok = knots.len() >= 2
                    && knots[0] == (0.0, 0.0)
                    && knots[knots.len() - 1] == (1.0, 1.0)
                    && knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(String::from(
                        "piecewise CDF knots must run from (0,0) to (1,1), strictly increasing",
                    )))
                }
            }
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self {
            AtomFreeLaw::Uniform01 => u,
            AtomFreeLaw::Beta { a, b } => math::beta_cdf(*a, *b, u),
            AtomFreeLaw::PiecewiseCdf { knots } => {
                let i = knots.partition_point(|k| k.0 <= u).clamp(1, knots.len() - 1);
                let (u0, f0) = knots[i - 1];
                let (u1, f1) = knots[i];
                f0 + (f1 - f0) * (u - u0) / (u1 - u0)
            }
        }
    }

    /// Quantile of `p ∈ (0, 1)`, clamped into `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        let x = match self {
            AtomFreeLaw::Uniform01 => p,
            AtomFreeLaw::Beta { a, b } => math::beta_quantile(*a, *b, p),
            AtomFreeLaw::PiecewiseCdf { knots } => {
                let i = knots.partition_point(|k| k.1 <= p).clamp(1, knots.len() - 1);
                let (u0, f0) = knots[i - 1];
                let (u1, f1) = knots[i];
                u0 + (u1 - u0) * (p - f0) / (f1 - f0)
            }
        };
        x.clamp(0.0, ONE_MINUS)
    }
}

/// Inter-arrival law `ν` of a renewal process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterArrivalSpec {
    /// `shift + Exp(rate)`; `shift = 0` gives a Poisson process.
    Exponential {
        rate: f64,
        #[serde(default)]
        shift: f64,
    },
    /// Piecewise-linear tail `s -> ν((s, ∞))` through `(s, tail)` knots.
    /// Repeating an abscissa encodes a jump (an atom of `ν`). The first knot
    /// is `(0, 1)` and the last tail value is `0`.
    PiecewiseTail { knots: Vec<(f64, f64)> },
}

impl InterArrivalSpec {
    pub fn exponential(rate: f64) -> Self {
        InterArrivalSpec::Exponential { rate, shift: 0.0 }
    }

    /// Deterministic inter-arrival `L`.
    pub fn constant(l: f64) -> Self {
        InterArrivalSpec::PiecewiseTail { knots: alloc::vec![(0.0, 1.0), (l, 1.0), (l, 0.0)] }
    }

    /// Uniform on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Self {
        let mut knots = alloc::vec![(0.0, 1.0)];
        if a > 0.0 {
            knots.push((a, 1.0));
        }
        knots.push((b, 0.0));
        InterArrivalSpec::PiecewiseTail { knots }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InterArrivalSpec::Exponential { rate, shift } => {
                if *rate > 0.0 && rate.is_finite() && *shift >= 0.0 && shift.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!("exponential inter-arrival needs rate > 0, shift >= 0; got ({rate}, {shift})")))
                }
            }
            InterArrivalSpec::PiecewiseTail { knots } => {
                let ok = knots.len() >= 2
                    && knots[0] == (0.0, 1.0)
                    && knots[knots.len() - 1].1 == 0.0
                    && knots.iter().all(|k| k.0.is_finite() && (0.0..=1.0).contains(&k.1))
                    && knots.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 <= w[0].1);
                if !ok {
                    return Err(Error::InvalidModel(String::from(
                        "tail knots must start at (0,1), end at tail 0, with s non-decreasing and tail non-increasing",
                    )));
                }
                if self.mean() <= 0.0 {
                    return Err(Error::InvalidModel(String::from("inter-arrival mean must be positive")));
                }
                Ok(())
            }
        }
    }

    /// `ν((s, ∞))`, right-continuous.
    pub fn tail(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 1.0;
        }
        match self {
            InterArrivalSpec::Exponential { rate, shift } => {
                if s < *shift {
                    1.0
                } else {
                    exp(-rate * (s - shift))
                }
            }
            InterArrivalSpec::PiecewiseTail { knots } => {
                // last knot with abscissa <= s
                let i = knots.partition_point(|k| k.0 <= s);
                if i == knots.len() {
                    return 0.0;
                }
                let (s0, t0) = knots[i - 1];
                let (s1, t1) = knots[i];
                t0 + (t1 - t0) * (s - s0) / (s1 - s0)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            InterArrivalSpec::Exponential { rate, shift } => shift + 1.0 / rate,
            InterArrivalSpec::PiecewiseTail { knots } => {
                knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum()
            }
        }
    }

    /// Inter-arrival draw from `u ∈ (0, 1)`: `inf{s : tail(s) <= u}`.
    pub fn sample(&self, u: f64) -> f64 {
        match self {
            InterArrivalSpec::Exponential { rate, shift } => shift - log(u) / rate,
            InterArrivalSpec::PiecewiseTail { knots } => {
                for w in knots.windows(2) {
                    let ((s0, t0), (s1, t1)) = (w[0], w[1]);
                    if t1 <= u {
                        if s1 == s0 || t0 == t1 {
                            return s0;
                        }
                        return s0 + (t0 - u) / (t0 - t1) * (s1 - s0);
                    }
                }
                knots[knots.len() - 1].0
            }
        }
    }

    /// `∫_s^∞ tail(x) dx / mean`: survival of the stationary forward
    /// recurrence time.
    pub fn forward_survival(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let mean = self.mean();
        match self {
            InterArrivalSpec::Exponential { rate, shift } => {
                if s < *shift {
                    (shift - s + 1.0 / rate) / mean
                } else {
                    exp(-rate * (s - shift)) / rate / mean
                }
            }
            InterArrivalSpec::PiecewiseTail { knots } => {
                let mut area = 0.0;
                for w in knots.windows(2) {
                    let ((s0, t0), (s1, t1)) = (w[0], w[1]);
                    if s1 <= s {
                        continue;
                    }
                    if s0 >= s {
                        area += 0.5 * (t0 + t1) * (s1 - s0);
                    } else {
                        let ts = t0 + (t1 - t0) * (s - s0) / (s1 - s0);
                        area += 0.5 * (ts + t1) * (s1 - s);
                    }
                }
                (area / mean).clamp(0.0, 1.0)
            }
        }
    }

    /// Density `tail(s) / mean` of the forward recurrence time.
    pub fn forward_density(&self, s: f64) -> f64 {
        self.tail(s) / self.mean()
    }

    /// Forward recurrence draw from `v ∈ (0, 1)` by exact inversion.
    pub fn sample_forward(&self, v: f64) -> f64 {
        let mean = self.mean();
        let target = v * mean;
        match self {
            InterArrivalSpec::Exponential { rate, shift } => {
                if target < *shift {
                    target
                } else {
                    let r = (target - shift) * rate;
                    shift - log1p(-r.min(ONE_MINUS)) / rate
                }
            }
            InterArrivalSpec::PiecewiseTail { knots } => {
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let ((s0, t0), (s1, t1)) = (w[0], w[1]);
                    let width = s1 - s0;
                    if width <= 0.0 {
                        continue;
                    }
                    let area = 0.5 * (t0 + t1) * width;
                    if acc + area >= target && area > 0.0 {
                        let r = target - acc;
                        let slope = (t1 - t0) / width;
                        let disc = (t0 * t0 + 2.0 * slope * r).max(0.0);
                        let x = 2.0 * r / (t0 + sqrt(disc));
                        return s0 + x.min(width);
                    }
                    acc += area;
                }
                knots[knots.len() - 1].0
            }
        }
    }
}

/// One atom of a spacing mixture. `spacing = 0` realizes the full line,
/// `spacing = inf` the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingAtom {
    #[serde(with = "ext_f64")]
    pub spacing: f64,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct MixtureRepr {
    atoms: Vec<SpacingAtom>,
}

/// Mixing law of the spacing `L` in `L(Z + U)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRepr", into = "MixtureRepr")]
pub struct MixtureSpec {
    atoms: Vec<SpacingAtom>,
    cumulative: Vec<f64>,
}

impl From<MixtureSpec> for MixtureRepr {
    fn from(m: MixtureSpec) -> Self {
        MixtureRepr { atoms: m.atoms }
    }
}

impl TryFrom<MixtureRepr> for MixtureSpec {
    type Error = Error;
    fn try_from(r: MixtureRepr) -> Result<Self> {
        MixtureSpec::new(r.atoms)
    }
}

impl MixtureSpec {
    pub fn new(atoms: Vec<SpacingAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidModel(String::from("spacing mixture has no atoms")));
        }
        if atoms.iter().any(|a| !(a.spacing >= 0.0) || !(a.prob >= 0.0) || !a.prob.is_finite()) {
            return Err(Error::InvalidModel(String::from("spacings and probabilities must be non-negative")));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = atoms.iter().map(|a| {
            acc += a.prob;
            acc
        }).collect();
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("spacing mixture has total mass {acc}")));
        }
        Ok(MixtureSpec { atoms, cumulative })
    }

    /// Point mass at `L`.
    pub fn fixed(spacing: f64) -> Self {
        MixtureSpec::new(alloc::vec![SpacingAtom { spacing, prob: 1.0 }]).expect("valid point mass")
    }

    pub fn atoms(&self) -> &[SpacingAtom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Spacing draw from `u ∈ (0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        let target = u * self.total_mass();
        let i = self.cumulative.partition_point(|&c| c <= target).min(self.atoms.len() - 1);
        self.atoms[i].spacing
    }

    pub fn mass_at(&self, spacing: f64) -> f64 {
        self.atoms.iter().filter(|a| a.spacing == spacing).map(|a| a.prob).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn piecewise_cdf_round_trip() {
        let law = AtomFreeLaw::PiecewiseCdf { knots: alloc::vec![(0.0, 0.0), (0.5, 0.1), (1.0, 1.0)] };
        law.validate().unwrap();
        for &u in &[0.05, 0.3, 0.5, 0.7, 0.99] {
            assert!((law.quantile(law.cdf(u)) - u).abs() < 1e-12);
        }
        let bad = AtomFreeLaw::PiecewiseCdf { knots: alloc::vec![(0.0, 0.0), (0.5, 0.5), (0.5, 0.7), (1.0, 1.0)] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn quantiles_stay_below_one() {
        let law = AtomFreeLaw::Beta { a: 5.0, b: 1.0 };
        assert!(law.quantile(1.0 - 1e-17) < 1.0);
        assert!(AtomFreeLaw::Uniform01.quantile(1.0) < 1.0);
    }

    #[test]
    fn tail_and_sampling() {
        let c = InterArrivalSpec::constant(2.0);
        c.validate().unwrap();
        assert_eq!(c.mean(), 2.0);
        assert_eq!(c.tail(1.999), 1.0);
        assert_eq!(c.tail(2.0), 0.0);
        assert_eq!(c.sample(0.3), 2.0);
        let u = InterArrivalSpec::uniform(0.0, 2.0);
        assert_eq!(u.mean(), 1.0);
        assert!((u.sample(0.25) - 1.5).abs() < 1e-12);
        assert!((u.forward_survival(1.0) - 0.25).abs() < 1e-12);
        let e = InterArrivalSpec::exponential(2.0);
        assert!((e.sample(libm::exp(-2.0)) - 1.0).abs() < 1e-12);
        assert!((e.forward_survival(0.5) - libm::exp(-1.0)).abs() < 1e-12);
    }

    #[test]
    fn forward_sampling_matches_survival() {
        let specs = [
            InterArrivalSpec::uniform(0.0, 2.0),
            InterArrivalSpec::constant(1.0),
            InterArrivalSpec::Exponential { rate: 1.0, shift: 1.5 },
            InterArrivalSpec::PiecewiseTail { knots: alloc::vec![(0.0, 1.0), (0.5, 0.6), (0.5, 0.4), (3.0, 0.0)] },
        ];
        for spec in &specs {
            spec.validate().unwrap();
            let mut r = Stream::new(11).rng();
            let xs: Vec<f64> = (0..100_000).map(|_| spec.sample_forward(r.uniform())).collect();
            let d = crate::stats::ks_one_sample(&xs, |s| 1.0 - spec.forward_survival(s));
            assert!(d < 0.006, "{spec:?}: {d}");
        }
    }

    #[test]
    fn mixture_sampling() {
        let m = MixtureSpec::new(alloc::vec![
            SpacingAtom { spacing: 0.0, prob: 0.25 },
            SpacingAtom { spacing: 1.0, prob: 0.5 },
            SpacingAtom { spacing: f64::INFINITY, prob: 0.25 },
        ])
        .unwrap();
        assert_eq!(m.sample(0.1), 0.0);
        assert_eq!(m.sample(0.5), 1.0);
        assert_eq!(m.sample(0.9), f64::INFINITY);
        assert!(MixtureSpec::new(alloc::vec![SpacingAtom { spacing: 1.0, prob: 0.7 }]).is_err());
    }
}
