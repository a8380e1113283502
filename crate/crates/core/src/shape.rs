//! Time constants `φ(x)` and limiting shapes `B = {φ <= 1}` by simulation.

use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use libm::{atan2, ceil, cos, fabs, floor, sin, sqrt};
use serde::{Deserialize, Serialize};

use crate::contact::ContactModel;
use crate::correspondence::mu_from_model_analytic;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fcp::{explore_with, ExploreOptions, PassageField};
use crate::lattice::{norms, round_to_lattice, LatticeBox, Vertex};
use crate::laws::AtomFreeLaw;
use crate::rng::replica_seed;
use crate::stats::MeanCi;

pub const DEFAULT_BINS: usize = 360;
/// Smallest reachable set a boundary is extracted from.
pub const MIN_REACHED: usize = 100;
/// Largest tolerated fraction of truncated replicas.
pub const MAX_TRUNCATED: f64 = 0.05;
const MAX_DOUBLINGS: u32 = 4;
const SPEED_WORD: u64 = 0x5EED_0F_F1;
const SHAPE_WORD: u64 = 0x5EED_0F_B0;

/// Estimates of `D(o, [t x]) / t` at increasing horizons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalSpeed {
    /// The requested `x`.
    pub x: Vec<f64>,
    /// `x / |x|_1`.
    pub direction: Vec<f64>,
    pub t_values: Vec<f64>,
    pub estimates: Vec<f64>,
    /// 95% half-widths.
    pub ci: Vec<f64>,
    /// Standard errors.
    pub se: Vec<f64>,
    pub phi_hat: f64,
    /// Estimates decrease in `t` up to their joint half-widths.
    pub monotone_ok: bool,
    pub replicas: usize,
    pub excluded: usize,
}

impl DirectionalSpeed {
    pub fn phi_se(&self) -> f64 {
        *self.se.last().unwrap_or(&f64::NAN)
    }

    /// `1 / φ`.
    pub fn speed(&self) -> f64 {
        1.0 / self.phi_hat
    }
}

/// `((2 d n e)^{-1} |x|_inf, |x|_1)`, the deterministic bounds on `φ(x)`.
pub fn phi_bounds(d: usize, n: u32, x: &[f64]) -> (f64, f64) {
    let (l1, linf) = norms(x);
    (linf / (2.0 * d as f64 * n as f64 * E), l1)
}

/// Contacts per day for lattice models, 1 otherwise.
pub fn model_n(model: &ContactModel) -> u32 {
    match model {
        ContactModel::PerturbedLattice { n, .. } | ContactModel::StationarizedLattice { n } => *n,
        ContactModel::UniformShift { base } | ContactModel::Boolean { base, .. } | ContactModel::Cox { base, .. } => {
            model_n(base)
        }
        _ => 1,
    }
}

// rough growth speed, only used to size boxes
fn speed_guess(model: &ContactModel) -> f64 {
    let g = match mu_from_model_analytic(model) {
        Ok(mu) => 2.0 / mu.mean(),
        Err(_) => 2.5 * model_n(model) as f64,
    };
    if g.is_finite() {
        g.clamp(0.5, 8.0)
    } else {
        8.0
    }
}

/// Box radius expected to contain `I(t)`; estimators double it on
/// truncation.
pub fn auto_box_radius(model: &ContactModel, t: f64) -> u32 {
    (ceil(1.25 * t * speed_guess(model)) as u32 + 10).min(4000)
}

enum Replica<T> {
    Done(T),
    Degenerate(T),
    Truncated,
}

pub fn estimate_phi<X: Executor>(
    model: &ContactModel,
    x: &[f64],
    t_max: f64,
    replicas: usize,
    seed: u64,
    box_radius: Option<u32>,
    exec: &X,
) -> Result<DirectionalSpeed> {
    model.validate()?;
    let (l1, _) = norms(x);
    if x.is_empty() || !(l1 > 0.0) || !l1.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("direction must have |x|_1 > 0, got {x:?}")));
    }
    if !(t_max >= 4.0) || !t_max.is_finite() || replicas == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "need t_max >= 4 and at least one replica, got t_max = {t_max}, replicas = {replicas}"
        )));
    }
    let d = x.len();
    let t_values = alloc::vec![t_max / 4.0, t_max / 2.0, t_max];
    let targets: Vec<Vertex> =
        t_values.iter().map(|t| round_to_lattice(&x.iter().map(|xi| t * xi).collect::<Vec<_>>())).collect();
    let reach = targets
        .iter()
        .map(|v| sqrt(v.coords().iter().map(|&c| (c * c) as f64).sum::<f64>()))
        .fold(0.0, f64::max);
    let start_radius = box_radius.unwrap_or(ceil(1.25 * reach) as u32 + 10);
    let doublings = if box_radius.is_some() { 0 } else { MAX_DOUBLINGS };
    let o = Vertex::origin(d);
    let opts = ExploreOptions { targets: targets.clone(), record_events: false, ..ExploreOptions::default() };

    let runs: Vec<Result<Replica<Vec<f64>>>> = exec.map(replicas, |r| {
        let s = replica_seed(seed ^ SPEED_WORD, r as u64);
        let mut radius = start_radius;
        for _ in 0..=doublings {
            let bbox = LatticeBox::centered(o, radius);
            let field = explore_with(model, s, &o, 0.0, f64::INFINITY, &bbox, &opts)?;
            let ds: Vec<f64> = targets.iter().zip(&t_values).map(|(v, t)| field.infection_time(v) / t).collect();
            if !field.is_truncated() && ds.iter().all(|v| v.is_finite()) {
                return Ok(Replica::Done(ds));
            }
            radius = radius.saturating_mul(2);
        }
        Ok(Replica::Truncated)
    });

    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut excluded = 0;
    for run in runs {
        match run? {
            Replica::Done(v) | Replica::Degenerate(v) => kept.push(v),
            Replica::Truncated => excluded += 1,
        }
    }
    if excluded as f64 > MAX_TRUNCATED * replicas as f64 {
        return Err(Error::TooManyTruncated { excluded, total: replicas });
    }
    let cis: Vec<MeanCi> =
        (0..t_values.len()).map(|k| MeanCi::of(&kept.iter().map(|r| r[k]).collect::<Vec<_>>())).collect();
    let monotone_ok = cis.windows(2).all(|w| w[1].mean <= w[0].mean + w[0].half_width + w[1].half_width);
    Ok(DirectionalSpeed {
        x: x.to_vec(),
        direction: x.iter().map(|xi| xi / l1).collect(),
        t_values,
        estimates: cis.iter().map(|c| c.mean).collect(),
        ci: cis.iter().map(|c| c.half_width).collect(),
        se: cis.iter().map(|c| c.se()).collect(),
        phi_hat: cis[2].mean,
        monotone_ok,
        replicas: kept.len(),
        excluded,
    })
}

/// Radial function of `t^{-1} Ĩ(t)` on an angular grid, averaged over
/// replicas. Bin `i` is centred at angle `(i + 1/2) 2π / bins`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeEstimate {
    pub n: u32,
    pub t: f64,
    pub radii: Vec<f64>,
    /// 95% half-widths per bin.
    pub ci: Vec<f64>,
    pub replica_radii: Vec<Vec<f64>>,
    pub replicas: usize,
    pub excluded: usize,
    /// Instant transmission filled the whole box: the shape is the box.
    pub degenerate: bool,
}

impl ShapeEstimate {
    /// A fixed radial function, e.g. a reference shape.
    pub fn from_radii(n: u32, t: f64, radii: Vec<f64>) -> Self {
        let ci = alloc::vec![0.0; radii.len()];
        ShapeEstimate { n, t, radii, ci, replica_radii: Vec::new(), replicas: 0, excluded: 0, degenerate: false }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(n: u32, t: f64, bins: usize, radius: F) -> Self {
        Self::from_radii(n, t, (0..bins).map(|i| radius(bin_angle(i, bins))).collect())
    }

    pub fn bins(&self) -> usize {
        self.radii.len()
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| bin_angle(i, self.bins())).collect()
    }

    /// `(angle, radius)` vertices of the boundary polygon.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        self.angles().into_iter().zip(self.radii.iter().copied()).collect()
    }

    /// Radii divided by `n`.
    pub fn rescaled(&self) -> ShapeEstimate {
        let k = self.n as f64;
        let mut out = self.clone();
        out.radii.iter_mut().for_each(|r| *r /= k);
        out.ci.iter_mut().for_each(|r| *r /= k);
        out.replica_radii.iter_mut().flatten().for_each(|r| *r /= k);
        out
    }

    /// Mean over replicas of the per-replica distance to `other`'s
    /// matching replica.
    pub fn replica_hausdorff(&self, other: &ShapeEstimate) -> Result<f64> {
        if self.bins() != other.bins() || self.replica_radii.len() != other.replica_radii.len() {
            return Err(Error::GridMismatch);
        }
        let m = self.replica_radii.len();
        if m == 0 {
            return Err(Error::InvalidArgument(alloc::string::String::from("no replicas")));
        }
        let total: f64 = self.replica_radii.iter().zip(&other.replica_radii).map(|(a, b)| radial_distance(a, b)).sum();
        Ok(total / m as f64)
    }
}

pub fn bin_angle(i: usize, bins: usize) -> f64 {
    (i as f64 + 0.5) * 2.0 * PI / bins as f64
}

fn radial_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| fabs(x - y)).fold(0.0, f64::max)
}

/// Max radial difference of two star-shaped sets on the same grid.
pub fn hausdorff(a: &ShapeEstimate, b: &ShapeEstimate) -> Result<f64> {
    if a.bins() != b.bins() {
        return Err(Error::GridMismatch);
    }
    Ok(radial_distance(&a.radii, &b.radii))
}

/// Farthest exit, along each bin's central ray, from the union of unit boxes
/// around the vertices with `D <= t`, divided by `t`.
pub fn shape_radii(field: &PassageField, t: f64, bins: usize) -> Result<Vec<f64>> {
    let bbox = field.bbox();
    if bbox.dim() != 2 {
        return Err(Error::InvalidArgument(alloc::format!("shapes need d = 2, got d = {}", bbox.dim())));
    }
    let inside = |x: i64, y: i64| field.infection_time(&Vertex::new(&[x, y])) <= t;
    let reached: Vec<(i64, i64)> = field
        .durations()
        .filter(|(_, d)| *d <= t)
        .map(|(v, _)| (v.coord(0), v.coord(1)))
        .collect();
    if reached.len() < MIN_REACHED {
        return Err(Error::InsufficientGrowth { vertices: reached.len(), required: MIN_REACHED });
    }
    let dirs: Vec<(f64, f64)> = (0..bins).map(|i| (cos(bin_angle(i, bins)), sin(bin_angle(i, bins)))).collect();
    let width = 2.0 * PI / bins as f64;
    let mut radii = alloc::vec![0.0f64; bins];
    for &(x, y) in &reached {
        let interior = (-1..=1).all(|dx| (-1..=1).all(|dy| inside(x + dx, y + dy)));
        if interior {
            continue;
        }
        let bins_hit: Vec<usize> = if x == 0 && y == 0 {
            (0..bins).collect()
        } else {
            let centre = atan2(y as f64, x as f64);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (cx, cy) in [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)] {
                let mut delta = atan2(y as f64 + cy, x as f64 + cx) - centre;
                if delta > PI {
                    delta -= 2.0 * PI;
                } else if delta < -PI {
                    delta += 2.0 * PI;
                }
                lo = lo.min(delta);
                hi = hi.max(delta);
            }
            let first = ceil((centre + lo) / width - 0.5) as i64;
            let last = floor((centre + hi) / width - 0.5) as i64;
            (first..=last).map(|i| i.rem_euclid(bins as i64) as usize).collect()
        };
        for i in bins_hit {
            if let Some(exit) = ray_exit(dirs[i], x as f64, y as f64) {
                radii[i] = radii[i].max(exit);
            }
        }
    }
    Ok(radii.into_iter().map(|r| r / t).collect())
}

// far intersection of the ray r (c, s), r >= 0, with the unit box around (x, y)
fn ray_exit((c, s): (f64, f64), x: f64, y: f64) -> Option<f64> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for (dir, centre) in [(c, x), (s, y)] {
        if fabs(dir) < 1e-300 {
            if fabs(centre) > 0.5 {
                return None;
            }
            continue;
        }
        let a = (centre - 0.5) / dir;
        let b = (centre + 0.5) / dir;
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo <= hi).then_some(hi)
}

/// Shapes of `t^{-1} Ĩ(t)` for each `t` in `ts`, from one exploration per
/// replica up to `max(ts)`.
pub fn estimate_shapes<X: Executor>(
    model: &ContactModel,
    ts: &[f64],
    replicas: usize,
    bins: usize,
    seed: u64,
    box_radius: Option<u32>,
    exec: &X,
) -> Result<Vec<ShapeEstimate>> {
    model.validate()?;
    if bins == 0 || bins % 8 != 0 {
        return Err(Error::InvalidArgument(alloc::format!("bins must be a positive multiple of 8, got {bins}")));
    }
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0) || !t.is_finite()) || replicas == 0 {
        return Err(Error::InvalidArgument(alloc::format!("bad horizons {ts:?} or replica count {replicas}")));
    }
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    let start_radius = box_radius.unwrap_or_else(|| auto_box_radius(model, t_max));
    let doublings = if box_radius.is_some() { 0 } else { MAX_DOUBLINGS };
    let o = Vertex::origin(2);
    let opts = ExploreOptions { record_events: false, ..ExploreOptions::default() };

    let runs: Vec<Result<Replica<Vec<Vec<f64>>>>> = exec.map(replicas, |r| {
        let s = replica_seed(seed ^ SHAPE_WORD, r as u64);
        let mut radius = start_radius;
        for _ in 0..=doublings {
            let bbox = LatticeBox::centered(o, radius);
            let field = explore_with(model, s, &o, 0.0, t_max, &bbox, &opts)?;
            let all = field.durations().all(|(_, d)| d == 0.0);
            if !field.is_truncated() || all {
                let radii = ts.iter().map(|&t| shape_radii(&field, t, bins)).collect::<Result<Vec<_>>>()?;
                return Ok(if all { Replica::Degenerate(radii) } else { Replica::Done(radii) });
            }
            radius = radius.saturating_mul(2);
        }
        Ok(Replica::Truncated)
    });

    let mut kept: Vec<Vec<Vec<f64>>> = Vec::new();
    let (mut excluded, mut degenerate) = (0, false);
    for run in runs {
        match run? {
            Replica::Done(v) => kept.push(v),
            Replica::Degenerate(v) => {
                degenerate = true;
                kept.push(v)
            }
            Replica::Truncated => excluded += 1,
        }
    }
    if excluded as f64 > MAX_TRUNCATED * replicas as f64 {
        return Err(Error::TooManyTruncated { excluded, total: replicas });
    }
    let n = model_n(model);
    Ok(ts
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let replica_radii: Vec<Vec<f64>> = kept.iter().map(|r| r[k].clone()).collect();
            let cis: Vec<MeanCi> =
                (0..bins).map(|i| MeanCi::of(&replica_radii.iter().map(|r| r[i]).collect::<Vec<_>>())).collect();
            ShapeEstimate {
                n,
                t,
                radii: cis.iter().map(|c| c.mean).collect(),
                ci: cis.iter().map(|c| if c.n > 1 { c.half_width } else { 0.0 }).collect(),
                replica_radii,
                replicas: kept.len(),
                excluded,
                degenerate,
            }
        })
        .collect())
}

pub fn estimate_shape<X: Executor>(
    model: &ContactModel,
    t: f64,
    replicas: usize,
    bins: usize,
    seed: u64,
    box_radius: Option<u32>,
    exec: &X,
) -> Result<ShapeEstimate> {
    Ok(estimate_shapes(model, &[t], replicas, bins, seed, box_radius, exec)?.remove(0))
}

/// Runs the perturbed lattice under two within-day laws from the same
/// uniforms and compares the reached sets at every integer day.
pub fn universality_check(
    law_a: &AtomFreeLaw,
    law_b: &AtomFreeLaw,
    n: u32,
    seed: u64,
    bbox: &LatticeBox,
    day_horizon: u32,
) -> Result<bool> {
    let model_a = ContactModel::PerturbedLattice { n, within_day: law_a.clone() };
    let model_b = ContactModel::PerturbedLattice { n, within_day: law_b.clone() };
    let o = Vertex::origin(bbox.dim());
    let opts = ExploreOptions { record_events: false, ..ExploreOptions::default() };
    let horizon = day_horizon as f64;
    let fa = explore_with(&model_a, seed, &o, 0.0, horizon, bbox, &opts)?;
    let fb = explore_with(&model_b, seed, &o, 0.0, horizon, bbox, &opts)?;
    let day = |d: f64| if d.is_finite() { ceil(d) } else { f64::INFINITY };
    let same = fa.durations().zip(fb.durations()).all(|((_, a), (_, b))| day(a) == day(b));
    Ok(same)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Max `|r(g θ) - r(θ)|` over bins and the 8 symmetries of the square.
    pub symmetry_discrepancy: f64,
    /// Max gap between the convex hull's radial function and the shape's.
    pub convexity_deficit: f64,
    /// Mean full 95% interval width per bin.
    pub ci_width: f64,
}

pub fn symmetry_convexity_report(shape: &ShapeEstimate) -> Result<SymmetryReport> {
    let b = shape.bins();
    if b == 0 || b % 4 != 0 {
        return Err(Error::InvalidArgument(alloc::format!("bins must be a multiple of 4, got {b}")));
    }
    let r = &shape.radii;
    let q = b / 4;
    let mut discrepancy = 0.0f64;
    for i in 0..b {
        for k in 0..4 {
            let rot = (i + k * q) % b;
            let refl = (b - 1 - i + k * q) % b;
            discrepancy = discrepancy.max(fabs(r[rot] - r[i])).max(fabs(r[refl] - r[i]));
        }
    }
    let ci_width = if shape.ci.is_empty() { 0.0 } else { 2.0 * shape.ci.iter().sum::<f64>() / b as f64 };
    Ok(SymmetryReport { symmetry_discrepancy: discrepancy, convexity_deficit: convexity_deficit(shape), ci_width })
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let it: Vec<(f64, f64)> = if pass == 0 { pts.clone() } else { pts.iter().rev().copied().collect() };
        for p in it {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let m = hull[hull.len() - 1];
                if cross((m.0 - a.0, m.1 - a.1), (p.0 - a.0, p.1 - a.1)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn convexity_deficit(shape: &ShapeEstimate) -> f64 {
    let pts: Vec<(f64, f64)> = shape.boundary().iter().map(|&(a, r)| (r * cos(a), r * sin(a))).collect();
    let hull = convex_hull(pts);
    let h = hull.len();
    let scale = shape.radii.iter().copied().fold(0.0, f64::max);
    let mut deficit = 0.0f64;
    for (a, r) in shape.boundary() {
        let u = (cos(a), sin(a));
        let mut reach = 0.0f64;
        for k in 0..h {
            let p = hull[k];
            let w = (hull[(k + 1) % h].0 - p.0, hull[(k + 1) % h].1 - p.1);
            let den = cross(u, w);
            if fabs(den) < 1e-300 {
                continue;
            }
            let t = cross(p, w) / den;
            let s = cross(p, u) / den;
            if (-1e-9..=1.0 + 1e-9).contains(&s) && t > 0.0 {
                reach = reach.max(t);
            }
        }
        deficit = deficit.max(reach - r);
    }
    if deficit <= 1e-12 * scale {
        0.0
    } else {
        deficit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::vec;

    fn square(a: f64) -> f64 {
        1.0 / fabs(cos(a)).max(fabs(sin(a)))
    }

    #[test]
    fn hausdorff_examples() {
        let a = ShapeEstimate::from_fn(1, 1.0, 360, |_| 1.0);
        let b = ShapeEstimate::from_fn(1, 1.0, 360, |_| 2.0);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff(&b, &a).unwrap(), 1.0);
        let c = ShapeEstimate::from_fn(1, 1.0, 180, |_| 1.0);
        assert_eq!(hausdorff(&a, &c), Err(Error::GridMismatch));
    }

    #[test]
    fn square_and_circle_reports() {
        for f in [square as fn(f64) -> f64, |_| 1.0] {
            let s = ShapeEstimate::from_fn(1, 1.0, 360, f);
            let rep = symmetry_convexity_report(&s).unwrap();
            assert!(rep.symmetry_discrepancy < 1e-12, "{rep:?}");
            assert_eq!(rep.convexity_deficit, 0.0);
        }
    }

    #[test]
    fn star_is_not_convex() {
        let star = ShapeEstimate::from_fn(1, 1.0, 360, |a| 1.0 + 0.3 * cos(5.0 * a));
        let rep = symmetry_convexity_report(&star).unwrap();
        assert!(rep.convexity_deficit > 0.1, "{rep:?}");
        assert!(rep.symmetry_discrepancy > 0.1);
    }

    #[test]
    fn ray_exit_box() {
        assert!((ray_exit((1.0, 0.0), 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((ray_exit((1.0, 0.0), 3.0, 0.0).unwrap() - 3.5).abs() < 1e-15);
        assert_eq!(ray_exit((1.0, 0.0), 3.0, 1.0), None);
        assert_eq!(ray_exit((-1.0, 0.0), 3.0, 0.0), None);
        let c = core::f64::consts::FRAC_1_SQRT_2;
        assert!((ray_exit((c, c), 2.0, 2.0).unwrap() - 2.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn full_line_is_degenerate() {
        let m = ContactModel::cox(1.0, ContactModel::poisson(1.0));
        let s = estimate_shape(&m, 5.0, 3, 360, 1, Some(12), &Sequential).unwrap();
        assert!(s.degenerate);
        // the box of radius 12 seen at scale 1/5
        for (a, r) in s.boundary() {
            assert!((r - 12.5 * square(a) / 5.0).abs() < 1e-9, "{a} {r}");
        }
    }

    #[test]
    fn insufficient_growth() {
        let m = ContactModel::perturbed(1);
        let e = estimate_shape(&m, 1.0, 1, 360, 3, None, &Sequential).unwrap_err();
        assert!(matches!(e, Error::InsufficientGrowth { required: 100, .. }), "{e:?}");
    }

    #[test]
    fn small_box_is_reported() {
        let m = ContactModel::perturbed(1);
        let e = estimate_shape(&m, 20.0, 4, 360, 3, Some(8), &Sequential).unwrap_err();
        assert_eq!(e, Error::TooManyTruncated { excluded: 4, total: 4 });
        let e = estimate_phi(&m, &[1.0, 0.0], 40.0, 4, 3, Some(8), &Sequential).unwrap_err();
        assert_eq!(e, Error::TooManyTruncated { excluded: 4, total: 4 });
    }

    #[test]
    fn shape_of_richardson_within_bounds() {
        let m = ContactModel::poisson(1.0);
        let s = estimate_shape(&m, 30.0, 6, 360, 11, None, &Sequential).unwrap();
        assert_eq!(s.replicas, 6);
        for (a, r) in s.boundary() {
            // φ <= |x|_1 puts the L1 unit ball inside; the 1/(2de) lower
            // bound keeps the shape in the L∞ ball of radius 4e
            let l1 = 1.0 / (fabs(cos(a)) + fabs(sin(a)));
            assert!(r >= l1 - 0.1, "{a} {r}");
            assert!(r * fabs(cos(a)).max(fabs(sin(a))) <= 4.0 * E, "{a} {r}");
        }
    }

    #[test]
    fn phi_homogeneous_and_subadditive() {
        let m = ContactModel::poisson(1.0);
        let e1 = estimate_phi(&m, &[1.0, 0.0], 40.0, 40, 5, None, &Sequential).unwrap();
        let e1x2 = estimate_phi(&m, &[2.0, 0.0], 40.0, 40, 5, None, &Sequential).unwrap();
        let e2 = estimate_phi(&m, &[0.0, 1.0], 40.0, 40, 6, None, &Sequential).unwrap();
        let diag = estimate_phi(&m, &[1.0, 1.0], 40.0, 40, 7, None, &Sequential).unwrap();
        let joint = 3.0 * sqrt(4.0 * e1.phi_se() * e1.phi_se() + e1x2.phi_se() * e1x2.phi_se());
        assert!(fabs(e1x2.phi_hat - 2.0 * e1.phi_hat) <= joint, "{} {}", e1.phi_hat, e1x2.phi_hat);
        assert!(diag.phi_hat <= e1.phi_hat + e2.phi_hat + 3.0 * diag.phi_se());
        for s in [&e1, &e2, &diag] {
            let (lo, hi) = phi_bounds(2, 1, &s.x);
            assert!(s.phi_hat >= lo - 3.0 * s.phi_se() && s.phi_hat <= hi + 3.0 * s.phi_se());
            assert!(s.estimates.iter().all(|v| *v > 0.0));
            assert_eq!(s.excluded, 0);
        }
        assert_eq!(e1.direction, vec![1.0, 0.0]);
        assert_eq!(diag.direction, vec![0.5, 0.5]);
    }

    #[test]
    fn universality_examples() {
        let bbox = LatticeBox::centered(Vertex::new(&[0, 0]), 20);
        let beta = AtomFreeLaw::Beta { a: 2.0, b: 2.0 };
        for seed in 0..10 {
            assert!(universality_check(&AtomFreeLaw::Uniform01, &beta, 1, seed, &bbox, 10).unwrap());
            assert!(universality_check(&beta, &beta, 2, seed, &bbox, 10).unwrap());
        }
    }
}
