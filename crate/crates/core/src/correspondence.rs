//! The dictionary between contact models and transition-time laws:
//! `μ([0, s]) = P(X ∩ [0, s] ≠ ∅)` in one direction, and three recipes
//! (lattice mixture, renewal, Boolean) that realize a given `μ` in the other.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::contact::{ContactModel, EdgeRealization, SeededModel};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fcp::{explore_source, ExploreOptions};
use crate::fpp::{dijkstra_with, DijkstraOptions};
use crate::lattice::{LatticeBox, Vertex};
use crate::laws::{ext_f64, AtomFreeLaw, InterArrivalSpec, MixtureSpec, SpacingAtom};
use crate::rng::{replica_seed, Stream};
use crate::stats::{isotonic_non_increasing, ks_two_sample, wilson};
use crate::survival::SurvivalCurve;

const CHUNK: usize = 8192;
/// Relative size below which a density drop is treated as rounding noise.
const JUMP_TOL: f64 = 1e-9;
/// Cells used to discretize a density on its support.
const CELLS: usize = 4000;

/// Closed-form `μ` for the stationary models.
pub fn mu_from_model_analytic(model: &ContactModel) -> Result<SurvivalCurve> {
    model.validate()?;
    Ok(match model {
        ContactModel::Poisson { rate } => SurvivalCurve::Exponential { rate: *rate },
        ContactModel::Renewal { inter_arrival } => match inter_arrival {
            InterArrivalSpec::Exponential { rate, shift } if *shift == 0.0 => SurvivalCurve::Exponential { rate: *rate },
            other => SurvivalCurve::ForwardRecurrence { inter_arrival: other.clone() },
        },
        ContactModel::ShiftedLattice { spacing } => match spacing.atoms() {
            [only] if only.spacing > 0.0 && only.spacing.is_finite() => SurvivalCurve::Uniform { hi: only.spacing },
            _ => SurvivalCurve::LatticeMixture { spacing: spacing.clone() },
        },
        ContactModel::PerturbedLattice { .. } => {
            return Err(Error::NoClosedForm(String::from(
                "the perturbed lattice is not stationary; stationarize it or estimate empirically",
            )))
        }
        ContactModel::StationarizedLattice { n } => SurvivalCurve::Power { n: *n, scale: 1.0 },
        ContactModel::UniformShift { base } => match &**base {
            ContactModel::PerturbedLattice { n, within_day: AtomFreeLaw::Uniform01 } => {
                SurvivalCurve::StationarizedPl { n: *n }
            }
            _ => return Err(Error::NoClosedForm(String::from("shifted lattice with a non-uniform within-day law"))),
        },
        ContactModel::Boolean { base, radius } => {
            SurvivalCurve::Boolean { base: Box::new(mu_from_model_analytic(base)?), radius: *radius }
        }
        ContactModel::Cox { full_line_prob, base } => {
            SurvivalCurve::Cox { p: *full_line_prob, base: Box::new(mu_from_model_analytic(base)?) }
        }
    })
}

/// 101 points on `[0, s_max]` with `survival(s_max) < 0.01`.
pub fn default_grid(mu: &SurvivalCurve) -> Vec<f64> {
    let s_max = match mu.support_end() {
        Some(e) if e > 0.0 => e,
        _ => {
            let mut s = 1.0;
            while mu.survival(s) >= 0.01 && s < 1e6 {
                s *= 1.25;
            }
            s
        }
    };
    uniform_grid(s_max, 101)
}

pub fn uniform_grid(s_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| s_max * i as f64 / (points - 1) as f64).collect()
}

/// Independent copy `r` of an edge's contact set for Monte Carlo estimates.
pub fn replica_realization(model: &ContactModel, seed: u64, r: usize) -> EdgeRealization<'_> {
    EdgeRealization::from_stream(model, Stream::new(seed).word(0x3E_0000).word(r as u64))
}

/// Monte Carlo `P(X ∩ [0, s] = ∅)` on `grid` with 95% Wilson intervals.
pub fn mu_from_model_empirical<E: Executor>(
    model: &ContactModel,
    grid: &[f64],
    replicas: usize,
    seed: u64,
    exec: &E,
) -> Result<SurvivalCurve> {
    model.validate()?;
    if !model.is_stationary() {
        return Err(Error::NonStationary(String::from("empirical μ needs a shift-stationary model")));
    }
    if grid.is_empty() || replicas == 0 || grid.windows(2).any(|w| w[1] < w[0]) || grid[0] < 0.0 {
        return Err(Error::InvalidArgument(String::from("grid must be non-empty, sorted and non-negative")));
    }
    let s_max = grid[grid.len() - 1];
    let chunks = replicas.div_ceil(CHUNK);
    let partial: Vec<Result<(Vec<usize>, usize)>> = exec.map(chunks, |c| {
        let mut above = alloc::vec![0usize; grid.len()];
        let mut infinite = 0;
        for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
            let real = replica_realization(model, seed, r).with_horizon(s_max + 1.0);
            let w = match real.first_contact_at_or_after(0.0) {
                Ok(w) => w,
                Err(Error::HorizonExhausted { .. }) => f64::MAX,
                Err(e) => return Err(e),
            };
            if w.is_infinite() {
                infinite += 1;
            }
            // number of grid points strictly below w
            let k = grid.partition_point(|&s| s < w);
            for a in &mut above[..k] {
                *a += 1;
            }
        }
        Ok((above, infinite))
    });
    let mut above = alloc::vec![0usize; grid.len()];
    let mut infinite = 0;
    for p in partial {
        let (a, i) = p?;
        for (x, y) in above.iter_mut().zip(a) {
            *x += y;
        }
        infinite += i;
    }
    let n = replicas as f64;
    let values = above.iter().map(|&k| k as f64 / n).collect();
    let (lower, upper) = above.iter().map(|&k| wilson(k, replicas, 1.96)).unzip();
    Ok(SurvivalCurve::Tabulated { grid: grid.to_vec(), values, lower, upper, atom_inf: infinite as f64 / n })
}

/// Largest 95% interval width of a tabulated curve (0 for analytic curves).
pub fn ci_width(curve: &SurvivalCurve) -> f64 {
    match curve {
        SurvivalCurve::Tabulated { lower, upper, .. } => {
            lower.iter().zip(upper).map(|(l, u)| u - l).fold(0.0, f64::max)
        }
        _ => 0.0,
    }
}

/// Midpoint concavity deficit of `F(s) = survival(0) - survival(s)` on a
/// uniform grid: the largest `(F(s) + F(t))/2 - F((s+t)/2)`, floored at 0.
pub fn check_concavity(grid: &[f64], survival: &[f64]) -> f64 {
    let m = grid.len().min(survival.len());
    if m < 3 {
        return 0.0;
    }
    let f: Vec<f64> = survival[..m].iter().map(|s| survival[0] - s).collect();
    let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in (i + 2..m).step_by(2) {
            let mid = (i + j) / 2;
            worst = worst.max(0.5 * (f[i] + f[j]) - f[mid]);
        }
    }
    if worst <= 16.0 * f64::EPSILON * scale {
        0.0
    } else {
        worst
    }
}

/// Concavity deficit of a curve on `grid`; empirical curves are made
/// monotone by pool-adjacent-violators first.
pub fn concavity_violation(curve: &SurvivalCurve, grid: &[f64]) -> f64 {
    let values: Vec<f64> = match curve {
        SurvivalCurve::Tabulated { grid: g, values, .. } if g.as_slice() == grid => {
            isotonic_non_increasing(values, &alloc::vec![1.0; values.len()])
        }
        _ => grid.iter().map(|&s| curve.survival(s)).collect(),
    };
    check_concavity(grid, &values)
}

/// How to realize a target `μ` as a contact model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    LatticeMixture { spacing: MixtureSpec },
    RenewalInversion { inter_arrival: InterArrivalSpec },
    BooleanRecipe {
        inter_arrival: InterArrivalSpec,
        #[serde(with = "ext_f64")]
        radius: f64,
    },
}

impl Recipe {
    pub fn model(&self) -> ContactModel {
        match self {
            Recipe::LatticeMixture { spacing } => ContactModel::ShiftedLattice { spacing: spacing.clone() },
            Recipe::RenewalInversion { inter_arrival } => ContactModel::Renewal { inter_arrival: inter_arrival.clone() },
            Recipe::BooleanRecipe { inter_arrival, radius } => {
                if radius.is_infinite() {
                    ContactModel::boolean(ContactModel::lattice(1.0), f64::INFINITY)
                } else {
                    ContactModel::boolean(ContactModel::Renewal { inter_arrival: inter_arrival.clone() }, *radius)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionOutput {
    pub recipe: Recipe,
    pub target_mu: SurvivalCurve,
}

/// Cell grid over the finite part of `μ`: breakpoints plus a uniform mesh,
/// ending where the remaining finite mass is negligible.
fn cell_grid(mu: &SurvivalCurve) -> Vec<f64> {
    let floor = mu.atom_at_infinity();
    let end = match mu.support_end() {
        Some(e) => e,
        None => {
            let mut s = 1.0;
            while mu.survival(s) - floor > 1e-13 && s < 1e6 {
                s *= 1.25;
            }
            s
        }
    };
    let mut grid: Vec<f64> = (0..=CELLS).map(|i| end * i as f64 / CELLS as f64).collect();
    grid.extend(mu.breakpoints().into_iter().filter(|&b| b < end));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Cell averages `(S(x_i) - S(x_{i+1})) / (x_{i+1} - x_i)` of the density,
/// made non-increasing up to rounding, with the leftover finite tail mass
/// folded into a final cell of the last height.
fn step_density(mu: &SurvivalCurve) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grid = cell_grid(mu);
    let floor = mu.atom_at_infinity();
    let mut heights: Vec<f64> = grid
        .windows(2)
        .map(|w| ((mu.survival(w[0]) - mu.survival(w[1])) / (w[1] - w[0])).max(0.0))
        .collect();
    let top = heights.iter().fold(0.0f64, |a, &h| a.max(h));
    for i in 1..heights.len() {
        if heights[i] > heights[i - 1] {
            if heights[i] - heights[i - 1] > JUMP_TOL * top.max(1.0) {
                return Err(Error::DensityNotMonotone { at: grid[i] });
            }
            heights[i] = heights[i - 1];
        }
    }
    let rest = mu.survival(grid[grid.len() - 1]) - floor;
    if rest > 0.0 {
        let last = heights.iter().rev().copied().find(|&h| h > 0.0).unwrap_or(0.0);
        if last > 0.0 {
            let end = grid[grid.len() - 1];
            grid.push(end + rest / last);
            heights.push(last);
        }
    }
    Ok((grid, heights))
}

/// Spacing mixture `ν = μ({0})δ_0 + μ({∞})δ_∞ + x Q(dx)`, `Q((a,b]) = f(a) - f(b)`.
pub fn construct_lattice_mixture(mu: &SurvivalCurve) -> Result<ConstructionOutput> {
    let atom0 = mu.atom_at_zero();
    let atom_inf = mu.atom_at_infinity();
    let mut atoms = Vec::new();
    if atom0 > 0.0 {
        atoms.push(SpacingAtom { spacing: 0.0, prob: atom0 });
    }
    if atom0 + atom_inf < 1.0 {
        let (grid, heights) = step_density(mu)?;
        let top = heights.iter().fold(0.0f64, |a, &h| a.max(h));
        for i in 0..heights.len() {
            let next = heights.get(i + 1).copied().unwrap_or(0.0);
            let drop = heights[i] - next;
            if drop > JUMP_TOL * 1e-3 * top {
                atoms.push(SpacingAtom { spacing: grid[i + 1], prob: grid[i + 1] * drop });
            }
        }
    }
    if atom_inf > 0.0 {
        atoms.push(SpacingAtom { spacing: f64::INFINITY, prob: atom_inf });
    }
    let total: f64 = atoms.iter().map(|a| a.prob).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidModel(format!("lattice mixture mass {total} differs from 1")));
    }
    for a in &mut atoms {
        a.prob /= total;
    }
    Ok(ConstructionOutput { recipe: Recipe::LatticeMixture { spacing: MixtureSpec::new(atoms)? }, target_mu: mu.clone() })
}

/// Averages of the density over `[0, h]` keep growing as `h -> 0`.
fn density_blows_up(mu: &SurvivalCurve) -> bool {
    let scale = mu.support_end().filter(|&e| e > 0.0).unwrap_or(1.0);
    let s0 = mu.survival(0.0);
    let avg = |h: f64| (s0 - mu.survival(h)) / h;
    let (coarse, fine) = (avg(1e-6 * scale), avg(1e-12 * scale));
    !fine.is_finite() || fine > 2.0 * coarse + 1e-300
}

/// `f(s) / f(0)` as an inter-arrival tail, exact where a closed form exists.
fn normalized_tail(mu: &SurvivalCurve) -> Result<InterArrivalSpec> {
    match mu {
        SurvivalCurve::Exponential { rate } => return Ok(InterArrivalSpec::exponential(*rate)),
        SurvivalCurve::Cox { base, .. } => return normalized_tail(base),
        SurvivalCurve::ForwardRecurrence { inter_arrival } => return Ok(inter_arrival.clone()),
        SurvivalCurve::Uniform { hi } => return Ok(InterArrivalSpec::constant(*hi)),
        _ => {}
    }
    if density_blows_up(mu) {
        return Err(Error::UnboundedDensity);
    }
    let (grid, heights) = step_density(mu)?;
    let f0 = heights[0];
    if f0 <= 0.0 {
        return Err(Error::InvalidModel(String::from("no continuous part to invert")));
    }
    // piecewise-linear tail through the cell-average heights at cell midpoints
    let mut knots = alloc::vec![(0.0, 1.0)];
    let mut prev = 1.0;
    for (i, &h) in heights.iter().enumerate() {
        let mid = 0.5 * (grid[i] + grid[i + 1]);
        let v = (h / f0).min(prev);
        knots.push((mid, v));
        prev = v;
    }
    let end = grid[grid.len() - 1];
    knots.push((end, prev));
    knots.push((end, 0.0));
    let spec = InterArrivalSpec::PiecewiseTail { knots };
    spec.validate()?;
    Ok(spec)
}

/// Stationary renewal process whose forward recurrence law is `μ`:
/// `ν((s, ∞)) = f(s) / f(0)`.
pub fn construct_renewal(mu: &SurvivalCurve) -> Result<ConstructionOutput> {
    if mu.atom_at_zero() > 0.0 {
        return Err(Error::UnsupportedAtom(String::from("renewal recipe needs μ({0}) = 0")));
    }
    if mu.atom_at_infinity() > 0.0 {
        return Err(Error::UnsupportedAtom(String::from("renewal recipe needs μ({∞}) = 0")));
    }
    let inter_arrival = normalized_tail(mu)?;
    Ok(ConstructionOutput { recipe: Recipe::RenewalInversion { inter_arrival }, target_mu: mu.clone() })
}

/// Boolean model over a renewal base: with `c = μ({0})`, the base tail is
/// `f(max(0, x - c/f(0))) / f(0)` and the radius `c / (2 f(0))`.
pub fn construct_boolean(mu: &SurvivalCurve) -> Result<ConstructionOutput> {
    if mu.atom_at_infinity() > 0.0 {
        return Err(Error::UnsupportedAtom(String::from("Boolean recipe needs μ({∞}) = 0")));
    }
    let c = mu.atom_at_zero();
    if c >= 1.0 {
        let recipe = Recipe::BooleanRecipe { inter_arrival: InterArrivalSpec::constant(1.0), radius: f64::INFINITY };
        return Ok(ConstructionOutput { recipe, target_mu: mu.clone() });
    }
    let tail = normalized_tail(mu)?;
    if c == 0.0 {
        let recipe = Recipe::BooleanRecipe { inter_arrival: tail, radius: 0.0 };
        return Ok(ConstructionOutput { recipe, target_mu: mu.clone() });
    }
    let f0 = mu.density(0.0);
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(Error::UnboundedDensity);
    }
    let shift = c / f0;
    let inter_arrival = match tail {
        InterArrivalSpec::Exponential { rate, shift: s } => InterArrivalSpec::Exponential { rate, shift: s + shift },
        InterArrivalSpec::PiecewiseTail { knots } => {
            let mut shifted = alloc::vec![(0.0, 1.0)];
            shifted.extend(knots.into_iter().map(|(s, v)| (s + shift, v)));
            InterArrivalSpec::PiecewiseTail { knots: shifted }
        }
    };
    inter_arrival.validate()?;
    let recipe = Recipe::BooleanRecipe { inter_arrival, radius: shift / 2.0 };
    Ok(ConstructionOutput { recipe, target_mu: mu.clone() })
}

/// Two-sample KS of FCP hitting times against FPP passage times at one vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingKs {
    pub vertex: Vertex,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub model: ContactModel,
    pub mu_analytic: Option<SurvivalCurve>,
    pub mu_empirical: SurvivalCurve,
    pub max_abs_gap: f64,
    pub ci_width: f64,
    pub concavity_violation: f64,
    pub hitting: Vec<HittingKs>,
}

impl LinkReport {
    /// Both gaps within tolerance: survival gap below `gap_tol` and every KS
    /// p-value above `alpha / k` for `k` tested vertices.
    pub fn passes(&self, gap_tol: f64, alpha: f64) -> bool {
        let k = self.hitting.len().max(1) as f64;
        self.max_abs_gap < gap_tol && self.hitting.iter().all(|h| h.p_value > alpha / k)
    }
}

/// Test vertices at `L1` distance at most 3 in dimension 2.
pub fn link_vertices() -> Vec<Vertex> {
    alloc::vec![Vertex::new(&[1, 0]), Vertex::new(&[1, 1]), Vertex::new(&[2, 1]), Vertex::new(&[3, 0])]
}

/// Compares the empirical `μ` of `model` against `mu`, and the FCP hitting
/// times against FPP passage times under `mu` on a radius-4 box in `Z^2`.
pub fn verify_link<E: Executor>(
    model: &ContactModel,
    mu: &SurvivalCurve,
    grid: &[f64],
    replicas: usize,
    hitting_replicas: usize,
    seed: u64,
    exec: &E,
) -> Result<LinkReport> {
    let empirical = mu_from_model_empirical(model, grid, replicas, seed, exec)?;
    let SurvivalCurve::Tabulated { values, .. } = &empirical else { unreachable!() };
    let max_abs_gap = grid.iter().zip(values).map(|(&s, v)| (v - mu.survival(s)).abs()).fold(0.0, f64::max);
    let width = ci_width(&empirical);
    let concavity = concavity_violation(&empirical, grid);

    let targets = link_vertices();
    let origin = Vertex::origin(2);
    let bbox = LatticeBox::centered(origin, 4);
    let horizon = 1e9;
    let fcp: Vec<Result<Vec<f64>>> = exec.map(hitting_replicas, |r| {
        let s = replica_seed(seed ^ 0xF0C0, r as u64);
        let source = SeededModel::new(model, s, horizon + 10.0);
        let opts = ExploreOptions { targets: targets.clone(), record_events: false, ..ExploreOptions::default() };
        let f = explore_source(&source, &origin, 0.0, horizon, &bbox, &opts)?;
        Ok(targets.iter().map(|v| f.infection_time(v)).collect())
    });
    let fpp: Vec<Result<Vec<f64>>> = exec.map(hitting_replicas, |r| {
        let s = replica_seed(seed ^ 0xF0F0, r as u64);
        let opts = DijkstraOptions { allow_zero_atom: true, targets: targets.clone() };
        let f = dijkstra_with(mu, s, &origin, &bbox, f64::INFINITY, &opts)?;
        Ok(targets.iter().map(|v| f.passage_time(v)).collect())
    });
    let fcp: Vec<Vec<f64>> = fcp.into_iter().collect::<Result<_>>()?;
    let fpp: Vec<Vec<f64>> = fpp.into_iter().collect::<Result<_>>()?;
    let hitting = targets
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let a: Vec<f64> = fcp.iter().map(|x| x[k]).collect();
            let b: Vec<f64> = fpp.iter().map(|x| x[k]).collect();
            let (statistic, p_value) = ks_two_sample(&a, &b);
            HittingKs { vertex: *v, statistic, p_value }
        })
        .collect();
    Ok(LinkReport {
        model: model.clone(),
        mu_analytic: mu_from_model_analytic(model).ok(),
        mu_empirical: empirical,
        max_abs_gap,
        ci_width: width,
        concavity_violation: concavity,
        hitting,
    })
}

/// Largest `|empirical - target| - k * (upper - lower)` over the grid; a
/// round trip passes when this is negative.
pub fn excess_over_ci(empirical: &SurvivalCurve, target: &SurvivalCurve, k: f64) -> f64 {
    match empirical {
        SurvivalCurve::Tabulated { grid, values, lower, upper, .. } => grid
            .iter()
            .enumerate()
            .map(|(i, &s)| (values[i] - target.survival(s)).abs() - k * (upper[i] - lower[i]))
            .fold(f64::NEG_INFINITY, f64::max),
        _ => f64::NAN,
    }
}
