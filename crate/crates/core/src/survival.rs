//! Survival curves `s -> μ((s, ∞))` of passage-time (weight) laws on
//! `[0, ∞]`, possibly with atoms at `0` and `+∞`.
//!
//! Curves are right-continuous, so `survival(0) = 1 - atom_at_zero()`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use libm::{exp, log, pow};
use serde::{Deserialize, Serialize};

use crate::laws::{ext_f64, InterArrivalSpec, MixtureSpec};
use crate::math;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurvivalCurve {
    Exponential { rate: f64 },
    /// Uniform on `[0, hi]`.
    Uniform { hi: f64 },
    /// Dirac mass (`at = 0` or `at = inf` allowed).
    PointMass {
        #[serde(with = "ext_f64")]
        at: f64,
    },
    /// `(1 - s/scale)_+^n`: the minimum of `n` uniforms on `[0, scale]`.
    Power { n: u32, scale: f64 },
    /// `1 - (s/scale)^alpha` on `[0, scale]`; for `alpha < 1` the density is
    /// unbounded at 0.
    PowerCdf { alpha: f64, scale: f64 },
    /// Waiting time of a shifted lattice with random spacing:
    /// `Σ_L p_L (1 - s/L)_+`.
    LatticeMixture { spacing: MixtureSpec },
    /// Forward recurrence time of a stationary renewal process.
    ForwardRecurrence { inter_arrival: InterArrivalSpec },
    /// Waiting time of the uniformly shifted perturbed lattice with uniform
    /// within-day law.
    StationarizedPl { n: u32 },
    /// Waiting time of the Boolean set of radius `r` around a stationary base.
    Boolean {
        base: Box<SurvivalCurve>,
        #[serde(with = "ext_f64")]
        radius: f64,
    },
    /// Full line with probability `p`, otherwise the base.
    Cox { p: f64, base: Box<SurvivalCurve> },
    /// Piecewise-constant density `heights[i]` on `[breaks[i], breaks[i+1])`
    /// plus atoms at zero and infinity.
    StepDensity {
        breaks: Vec<f64>,
        heights: Vec<f64>,
        atom_zero: f64,
        atom_inf: f64,
    },
    /// Empirical survival on a grid, right-continuous step interpolation,
    /// with pointwise confidence bounds.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        atom_inf: f64,
    },
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn pl_stationary_survival(n: u32, s: f64) -> f64 {
    let nf = n as f64;
    if s >= 2.0 {
        0.0
    } else if s >= 1.0 {
        let sigma = s - 1.0;
        let f = math::factorial(n);
        pow(1.0 - sigma, 2.0 * nf + 1.0) * f * f / math::factorial(2 * n + 1)
    } else {
        let head = pow(1.0 - s, nf + 1.0);
        let tail = math::integrate(|a| pow(a, nf) * pow(2.0 - a - s, nf), 1.0 - s, 1.0, n as usize + 1);
        head + tail
    }
}

impl SurvivalCurve {
    /// `μ((s, ∞))`.
    pub fn survival(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 1.0;
        }
        match self {
            SurvivalCurve::Exponential { rate } => exp(-rate * s),
            SurvivalCurve::Uniform { hi } => clamp01(1.0 - s / hi),
            SurvivalCurve::PointMass { at } => {
                if s < *at {
                    1.0
                } else {
                    0.0
                }
            }
            SurvivalCurve::Power { n, scale } => {
                if s >= *scale {
                    0.0
                } else {
                    pow(1.0 - s / scale, *n as f64)
                }
            }
            SurvivalCurve::PowerCdf { alpha, scale } => clamp01(1.0 - pow(s / scale, *alpha)),
            SurvivalCurve::LatticeMixture { spacing } => clamp01(
                spacing
                    .atoms()
                    .iter()
                    .map(|a| {
                        if a.spacing.is_infinite() {
                            a.prob
                        } else if a.spacing == 0.0 || s >= a.spacing {
                            0.0
                        } else {
                            a.prob * (1.0 - s / a.spacing)
                        }
                    })
                    .sum(),
            ),
            SurvivalCurve::ForwardRecurrence { inter_arrival } => inter_arrival.forward_survival(s),
            SurvivalCurve::StationarizedPl { n } => clamp01(pl_stationary_survival(*n, s)),
            SurvivalCurve::Boolean { base, radius } => {
                if radius.is_infinite() {
                    0.0
                } else {
                    base.survival(s + 2.0 * radius)
                }
            }
            SurvivalCurve::Cox { p, base } => (1.0 - p) * base.survival(s),
            SurvivalCurve::StepDensity { breaks, heights, atom_zero, atom_inf } => {
                let mut mass = *atom_zero;
                for (i, h) in heights.iter().enumerate() {
                    let (a, b) = (breaks[i], breaks[i + 1]);
                    if s <= a {
                        break;
                    }
                    mass += h * (s.min(b) - a);
                }
                clamp01(1.0 - mass).max(*atom_inf)
            }
            SurvivalCurve::Tabulated { grid, values, .. } => {
                let i = grid.partition_point(|&g| g <= s);
                if i == 0 {
                    1.0
                } else {
                    values[i - 1]
                }
            }
        }
    }

    pub fn atom_at_zero(&self) -> f64 {
        match self {
            SurvivalCurve::StepDensity { atom_zero, .. } => *atom_zero,
            _ => 1.0 - self.survival(0.0),
        }
    }

    pub fn atom_at_infinity(&self) -> f64 {
        match self {
            SurvivalCurve::PointMass { at } if at.is_infinite() => 1.0,
            SurvivalCurve::LatticeMixture { spacing } => spacing.mass_at(f64::INFINITY),
            SurvivalCurve::Boolean { base, radius } if radius.is_finite() => base.atom_at_infinity(),
            SurvivalCurve::Cox { p, base } => (1.0 - p) * base.atom_at_infinity(),
            SurvivalCurve::StepDensity { atom_inf, .. } | SurvivalCurve::Tabulated { atom_inf, .. } => *atom_inf,
            _ => 0.0,
        }
    }

    /// Finite abscissae where the curve may have a jump or a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match self {
            SurvivalCurve::Exponential { .. } => Vec::new(),
            SurvivalCurve::Uniform { hi } => alloc::vec![*hi],
            SurvivalCurve::PointMass { at } => alloc::vec![*at],
            SurvivalCurve::Power { scale, .. } | SurvivalCurve::PowerCdf { scale, .. } => alloc::vec![*scale],
            SurvivalCurve::LatticeMixture { spacing } => spacing.atoms().iter().map(|a| a.spacing).collect(),
            SurvivalCurve::ForwardRecurrence { inter_arrival } => match inter_arrival {
                InterArrivalSpec::Exponential { shift, .. } => alloc::vec![*shift],
                InterArrivalSpec::PiecewiseTail { knots } => knots.iter().map(|k| k.0).collect(),
            },
            SurvivalCurve::StationarizedPl { .. } => alloc::vec![1.0, 2.0],
            SurvivalCurve::Boolean { base, radius } => {
                base.breakpoints().into_iter().map(|b| b - 2.0 * radius).collect()
            }
            SurvivalCurve::Cox { base, .. } => base.breakpoints(),
            SurvivalCurve::StepDensity { breaks, .. } => breaks.clone(),
            SurvivalCurve::Tabulated { grid, .. } => grid.clone(),
        };
        out.retain(|b| b.is_finite() && *b > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Right end of the support of the finite part, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            SurvivalCurve::Exponential { .. } => None,
            SurvivalCurve::ForwardRecurrence { inter_arrival: InterArrivalSpec::Exponential { .. } } => None,
            SurvivalCurve::Boolean { base, radius } => {
                if radius.is_infinite() {
                    Some(0.0)
                } else {
                    base.support_end().map(|e| (e - 2.0 * radius).max(0.0))
                }
            }
            SurvivalCurve::Cox { base, .. } => base.support_end(),
            SurvivalCurve::Tabulated { grid, .. } => grid.last().copied(),
            _ => Some(self.breakpoints().last().copied().unwrap_or(0.0)),
        }
    }

    /// Right density `lim (S(s) - S(s+h)) / h`, by a one-sided difference
    /// except where a closed form is at hand.
    pub fn density(&self, s: f64) -> f64 {
        match self {
            SurvivalCurve::Exponential { rate } => rate * exp(-rate * s),
            SurvivalCurve::Uniform { hi } => {
                if s < *hi {
                    1.0 / hi
                } else {
                    0.0
                }
            }
            SurvivalCurve::Power { n, scale } => {
                if s < *scale {
                    *n as f64 / scale * pow(1.0 - s / scale, *n as f64 - 1.0)
                } else {
                    0.0
                }
            }
            SurvivalCurve::PowerCdf { alpha, scale } => {
                if s < *scale {
                    alpha / scale * pow(s / scale, alpha - 1.0)
                } else {
                    0.0
                }
            }
            SurvivalCurve::ForwardRecurrence { inter_arrival } => inter_arrival.forward_density(s),
            SurvivalCurve::Boolean { base, radius } if radius.is_finite() => base.density(s + 2.0 * radius),
            SurvivalCurve::Cox { p, base } => (1.0 - p) * base.density(s),
            SurvivalCurve::StepDensity { breaks, heights, .. } => {
                let i = breaks.partition_point(|&b| b <= s);
                if i == 0 || i > heights.len() {
                    0.0
                } else {
                    heights[i - 1]
                }
            }
            _ => {
                let h = 1e-7 * (1.0 + s);
                ((self.survival(s) - self.survival(s + h)) / h).max(0.0)
            }
        }
    }

    /// Weight draw from `u ∈ (0, 1)`: `inf{s >= 0 : S(s) <= u}`, and `+inf`
    /// when `u` falls inside the atom at infinity.
    pub fn sample_weight(&self, u: f64) -> f64 {
        if u < self.atom_at_infinity() {
            return f64::INFINITY;
        }
        if self.survival(0.0) <= u {
            return 0.0;
        }
        match self {
            SurvivalCurve::Exponential { rate } => -log(u) / rate,
            SurvivalCurve::Uniform { hi } => hi * (1.0 - u),
            SurvivalCurve::PointMass { at } => *at,
            SurvivalCurve::Power { n, scale } => scale * (1.0 - pow(u, 1.0 / *n as f64)),
            SurvivalCurve::PowerCdf { alpha, scale } => scale * pow(1.0 - u, 1.0 / alpha),
            SurvivalCurve::Cox { p, base } => base.sample_weight(u / (1.0 - p)),
            SurvivalCurve::Boolean { base, radius } => (base.sample_weight(u) - 2.0 * radius).max(0.0),
            SurvivalCurve::ForwardRecurrence { inter_arrival } => inter_arrival.sample_forward(1.0 - u),
            _ => self.invert(u),
        }
    }

    fn invert(&self, u: f64) -> f64 {
        let mut hi = self.support_end().filter(|&e| e > 0.0).unwrap_or(1.0);
        while self.survival(hi) > u {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.survival(mid) <= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `E[W]` over the finite part plus `+inf` if there is an atom at infinity.
    pub fn mean(&self) -> f64 {
        if self.atom_at_infinity() > 0.0 {
            return f64::INFINITY;
        }
        match self {
            SurvivalCurve::Exponential { rate } => 1.0 / rate,
            SurvivalCurve::Uniform { hi } => hi / 2.0,
            SurvivalCurve::PointMass { at } => *at,
            SurvivalCurve::Power { n, scale } => scale / (*n as f64 + 1.0),
            SurvivalCurve::PowerCdf { alpha, scale } => scale / (alpha + 1.0),
            SurvivalCurve::LatticeMixture { spacing } => {
                spacing.atoms().iter().map(|a| a.prob * a.spacing / 2.0).sum()
            }
            SurvivalCurve::Cox { p, base } => (1.0 - p) * base.mean(),
            _ => self.integrate_survival(),
        }
    }

    fn integrate_survival(&self) -> f64 {
        let mut cuts = alloc::vec![0.0];
        cuts.extend(self.breakpoints());
        let end = match self.support_end() {
            Some(e) => e,
            None => {
                let mut e = cuts.last().copied().unwrap_or(0.0).max(1.0);
                while self.survival(e) > 1e-17 {
                    e *= 2.0;
                }
                e
            }
        };
        cuts.retain(|&c| c <= end);
        cuts.push(end);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            // subdivide long pieces so smooth tails are integrated accurately
            let pieces = (libm::ceil(w[1] - w[0]) as usize).clamp(1, 4096);
            let step = (w[1] - w[0]) / pieces as f64;
            for k in 0..pieces {
                let a = w[0] + k as f64 * step;
                total += math::integrate(|s| self.survival(s), a, a + step, 12);
            }
        }
        total
    }
}
