//! Monotone couplings: perturbed against stationarized lattice on shared
//! per-edge uniforms `(u1, u2)`, and the time-rescaled perturbed lattice
//! against the Richardson model on one shared uniform per edge.

use alloc::collections::BTreeMap;

use libm::{floor, log, pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcp::{explore_by_reveal, PassageField};
use crate::lattice::{EdgeKey, LatticeBox, Vertex};
use crate::math::binomial_cdf_table;
use crate::rng::Stream;

const COUPLING_WORD: u64 = 0xC0_0B1E;
const DOMINATION_WORD: u64 = 0xD0_3110;

/// The two uniforms attached to an edge for the whole coupled run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledEdgeState {
    pub u1: f64,
    pub u2: f64,
}

impl CoupledEdgeState {
    pub fn of(seed: u64, edge: &EdgeKey) -> Self {
        let s = Stream::new(seed).word(COUPLING_WORD).edge(edge);
        CoupledEdgeState { u1: s.uniform(0, 0), u2: s.uniform(0, 1) }
    }
}

/// `⌊t⌋ + 1`, also at integer `t`.
pub fn next_day(t: f64) -> f64 {
    floor(t) + 1.0
}

/// Contacts left in the rest of the day from phase `t`:
/// `min{k : u1 <= F_{n, 1-t}(k)}` with `F` the binomial CDF.
pub fn remaining_contacts(state: &CoupledEdgeState, n: u32, t: f64) -> u32 {
    let table = binomial_cdf_table(n, 1.0 - t);
    table.iter().position(|&f| state.u1 <= f).unwrap_or(n as usize) as u32
}

/// `τ (1 - u2^{1/K})`, distributed as the minimum of `K` uniforms on `[0, τ]`.
pub fn min_of_uniforms(state: &CoupledEdgeState, tau: f64, k: u32) -> f64 {
    tau * (1.0 - pow(state.u2, 1.0 / k as f64))
}

/// Which branch of the monotonicity argument an edge fell into, for edges
/// revealed from the same vertex `v` at `s` (perturbed) and `s'` (stationarized).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CouplingCase {
    /// Same day, a contact remains for the perturbed run.
    SameDayContact,
    /// Same day, a contact remains only for the stationarized run.
    OnlyRigidContact,
    /// Same day, no contact remains for either run.
    BothNextDay,
    /// The stationarized run is at least one day ahead.
    EarlierDay,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub time: f64,
    pub vertex: Vertex,
}

#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub n: u32,
    pub seed: u64,
    pub pl_field: PassageField,
    pub sl_field: PassageField,
    pub inclusion_ok: bool,
    pub first_violation: Option<Violation>,
    /// Count of each case over the edges revealed from the same vertex in both runs.
    pub case_counts: [usize; 4],
}

impl CoupledRun {
    pub fn summary(&self) -> CoupledSummary {
        CoupledSummary {
            seed: self.seed,
            n: self.n,
            inclusion_ok: self.inclusion_ok,
            first_violation: self.first_violation,
            case_counts: self.case_counts,
        }
    }
}

/// One JSON-lines record per coupled run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledSummary {
    pub seed: u64,
    pub n: u32,
    pub inclusion_ok: bool,
    pub first_violation: Option<Violation>,
    pub case_counts: [usize; 4],
}

/// Perturbed lattice next contact after first reveal at `s`.
fn pl_next(state: &CoupledEdgeState, n: u32, s: f64) -> f64 {
    let ceil = next_day(s);
    let k = remaining_contacts(state, n, s - floor(s));
    if k >= 1 {
        ceil - (ceil - s) * pow(state.u2, 1.0 / k as f64)
    } else {
        ceil + min_of_uniforms(state, 1.0, n)
    }
}

/// Stationarized lattice next contact after first reveal at `s`.
fn sl_next(state: &CoupledEdgeState, n: u32, s: f64) -> f64 {
    let ceil = next_day(s);
    let phase = s - floor(s);
    let k = remaining_contacts(state, n, phase);
    if k >= 1 {
        ceil - (ceil - s) * pow(state.u2, 1.0 / k as f64)
    } else {
        ceil + min_of_uniforms(state, phase, n)
    }
}

fn classify(state: &CoupledEdgeState, n: u32, s: f64, s_rigid: f64) -> CouplingCase {
    if next_day(s) == next_day(s_rigid) {
        let k = remaining_contacts(state, n, s - floor(s));
        let k_rigid = remaining_contacts(state, n, s_rigid - floor(s_rigid));
        if k >= 1 {
            CouplingCase::SameDayContact
        } else if k_rigid > 0 {
            CouplingCase::OnlyRigidContact
        } else {
            CouplingCase::BothNextDay
        }
    } else {
        CouplingCase::EarlierDay
    }
}

fn first_violation(slow: &PassageField, fast: &PassageField) -> Option<Violation> {
    slow.event_log()
        .iter()
        .filter(|e| fast.arrival_time(&e.vertex) > e.time)
        .map(|e| Violation { time: e.time, vertex: e.vertex })
        .next()
}

/// Runs the perturbed (`PL(n)`, uniform offsets) and stationarized (`SL(n)`)
/// explorations on shared uniforms and checks `I_PL(t) ⊆ I_SL(t)`.
pub fn coupled_explore_pl_sl(n: u32, seed: u64, origin: &Vertex, bbox: &LatticeBox, horizon: f64) -> Result<CoupledRun> {
    if n == 0 {
        return Err(Error::InvalidArgument(alloc::string::String::from("n must be >= 1")));
    }
    let mut pl_reveal: BTreeMap<EdgeKey, (Vertex, f64)> = BTreeMap::new();
    let mut sl_reveal: BTreeMap<EdgeKey, (Vertex, f64)> = BTreeMap::new();
    let pl_field = explore_by_reveal(origin, 0.0, horizon, bbox, |v, e, s| {
        pl_reveal.insert(*e, (*v, s));
        Ok(pl_next(&CoupledEdgeState::of(seed, e), n, s))
    })?;
    let sl_field = explore_by_reveal(origin, 0.0, horizon, bbox, |v, e, s| {
        sl_reveal.insert(*e, (*v, s));
        Ok(sl_next(&CoupledEdgeState::of(seed, e), n, s))
    })?;
    let mut case_counts = [0usize; 4];
    for (e, (v, s)) in &pl_reveal {
        if let Some((v_rigid, s_rigid)) = sl_reveal.get(e) {
            if v == v_rigid {
                case_counts[classify(&CoupledEdgeState::of(seed, e), n, *s, *s_rigid) as usize] += 1;
            }
        }
    }
    let first_violation = first_violation(&pl_field, &sl_field);
    Ok(CoupledRun { n, seed, inclusion_ok: first_violation.is_none(), first_violation, pl_field, sl_field, case_counts })
}

/// Waiting time of the rescaled perturbed lattice (`n` uniform contacts per
/// block of `n` days) from block phase `t ∈ [0, n)`, by inversion of
/// `P(W > s) = (1 - s/n)^n` for `s <= n - t` and
/// `(t/n)^n ((2n - t - s)/n)^n` beyond.
pub fn rescaled_pl_wait(n: u32, t: f64, u: f64) -> f64 {
    let nf = n as f64;
    if u >= pow(t / nf, nf) {
        nf * (1.0 - pow(u, 1.0 / nf))
    } else {
        2.0 * nf - t - nf * nf * pow(u, 1.0 / nf) / t
    }
}

/// Exponential waiting time from the same uniform.
pub fn richardson_wait(u: f64) -> f64 {
    -log(u)
}

#[derive(Clone, Debug)]
pub struct DominationRun {
    pub n: u32,
    pub seed: u64,
    /// Rescaled perturbed lattice: `D̄ = n D`.
    pub pl_field: PassageField,
    pub richardson_field: PassageField,
    pub dominated: bool,
    pub first_violation: Option<Violation>,
}

/// Rescaled `PL(n)` against Richardson on one shared uniform per edge,
/// checking `J_R(t) ⊆ Ī_n(t)`.
pub fn coupled_explore_pl_richardson(
    n: u32,
    seed: u64,
    origin: &Vertex,
    bbox: &LatticeBox,
    horizon: f64,
) -> Result<DominationRun> {
    if n == 0 {
        return Err(Error::InvalidArgument(alloc::string::String::from("n must be >= 1")));
    }
    let nf = n as f64;
    let shared = |e: &EdgeKey| Stream::new(seed).word(DOMINATION_WORD).edge(e).uniform(0, 0);
    let pl_field = explore_by_reveal(origin, 0.0, horizon, bbox, |_, e, s| {
        let phase = s - nf * floor(s / nf);
        Ok(s + rescaled_pl_wait(n, phase, shared(e)))
    })?;
    let richardson_field = explore_by_reveal(origin, 0.0, horizon, bbox, |_, e, s| Ok(s + richardson_wait(shared(e))))?;
    let first_violation = first_violation(&richardson_field, &pl_field);
    Ok(DominationRun { n, seed, dominated: first_violation.is_none(), first_violation, pl_field, richardson_field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use crate::contact::ContactModel;
    use crate::fcp::explore;
    use crate::stats::{ks_one_sample, ks_two_sample};
    use libm::sqrt;

    fn st(u1: f64, u2: f64) -> CoupledEdgeState {
        CoupledEdgeState { u1, u2 }
    }

    #[test]
    fn remaining_contacts_examples() {
        assert_eq!(remaining_contacts(&st(0.5, 0.5), 1, 0.5), 0);
        for u1 in [1e-9, 0.3, 0.999] {
            assert_eq!(remaining_contacts(&st(u1, 0.5), 2, 0.0), 2);
        }
        assert_eq!(remaining_contacts(&st(0.9, 0.5), 2, 0.5), 2);
    }

    #[test]
    fn remaining_contacts_is_non_increasing() {
        let mut r = Stream::new(4).rng();
        for _ in 0..1000 {
            let state = st(r.uniform(), 0.5);
            for n in [1, 2, 3] {
                let mut prev = n;
                for i in 0..1000 {
                    let k = remaining_contacts(&state, n, i as f64 / 1000.0);
                    assert!(k <= prev);
                    prev = k;
                }
            }
        }
    }

    #[test]
    fn min_of_uniforms_examples() {
        assert!((min_of_uniforms(&st(0.5, 0.25), 1.0, 1) - 0.75).abs() < 1e-15);
        assert!((min_of_uniforms(&st(0.5, 0.25), 0.5, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn min_of_uniforms_law() {
        let mut r = Stream::new(6).rng();
        let direct: Vec<f64> = (0..1_000_000).map(|_| r.uniform().min(r.uniform()).min(r.uniform())).collect();
        let coupled: Vec<f64> = (0..1_000_000).map(|_| min_of_uniforms(&st(0.5, r.uniform()), 1.0, 3)).collect();
        let exact = |x: f64| 1.0 - pow(1.0 - x, 3.0);
        assert!(ks_one_sample(&coupled, exact) < 0.002);
        assert!(ks_two_sample(&direct, &coupled).0 < 0.002);
    }

    #[test]
    fn trivial_runs() {
        let o = Vertex::origin(2);
        let bbox = LatticeBox::centered(o, 3);
        let run = coupled_explore_pl_sl(2, 1, &o, &bbox, 0.0).unwrap();
        assert!(run.inclusion_ok);
        assert_eq!(run.pl_field.reachable(0.0).len(), 1);
        assert_eq!(run.sl_field.reachable(0.0).len(), 1);
    }

    #[test]
    fn inclusion_on_a_few_seeds() {
        let o = Vertex::origin(2);
        let bbox = LatticeBox::centered(o, 15);
        let mut cases = [0usize; 4];
        for n in 1..=3 {
            for seed in 0..20 {
                let run = coupled_explore_pl_sl(n, seed, &o, &bbox, 10.0).unwrap();
                assert!(run.inclusion_ok, "n={n} seed={seed}: {:?}", run.first_violation);
                for (c, k) in cases.iter_mut().zip(run.case_counts) {
                    *c += k;
                }
            }
        }
        assert!(cases.iter().all(|&c| c > 0), "{cases:?}");
    }

    #[test]
    fn coupled_marginals_match_standalone_models() {
        let o = Vertex::origin(2);
        let bbox = LatticeBox::centered(o, 5);
        let v = Vertex::new(&[2, 1]);
        let reps = 3000;
        let pl = ContactModel::perturbed(2);
        let sl = ContactModel::stationarized(2);
        let mut coupled_pl = Vec::new();
        let mut coupled_sl = Vec::new();
        let mut alone_pl = Vec::new();
        let mut alone_sl = Vec::new();
        for seed in 0..reps {
            let run = coupled_explore_pl_sl(2, seed, &o, &bbox, 30.0).unwrap();
            coupled_pl.push(run.pl_field.infection_time(&v));
            coupled_sl.push(run.sl_field.infection_time(&v));
            alone_pl.push(explore(&pl, seed + 1_000_000, &o, 0.0, 30.0, &bbox).unwrap().infection_time(&v));
            alone_sl.push(explore(&sl, seed + 1_000_000, &o, 0.0, 30.0, &bbox).unwrap().infection_time(&v));
        }
        assert!(ks_two_sample(&coupled_pl, &alone_pl).1 > 0.005);
        assert!(ks_two_sample(&coupled_sl, &alone_sl).1 > 0.005);
    }

    #[test]
    fn rescaled_wait_examples() {
        let pl = rescaled_pl_wait(2, 0.0, 0.5);
        assert!((pl - 2.0 * (1.0 - sqrt(0.5))).abs() < 1e-15);
        assert!((pl - 0.5858).abs() < 1e-4);
        assert!((richardson_wait(0.5) - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(pl <= richardson_wait(0.5));
    }

    #[test]
    fn rescaled_wait_inverts_its_survival() {
        for n in [1u32, 2, 4] {
            let nf = n as f64;
            for t in [0.0, 0.3, 0.5 * nf, nf - 0.01] {
                let surv = |s: f64| {
                    if s <= nf - t {
                        pow(1.0 - s / nf, nf)
                    } else {
                        pow(t / nf, nf) * pow((2.0 * nf - t - s) / nf, nf)
                    }
                };
                for i in 1..100 {
                    let u = i as f64 / 100.0;
                    let w = rescaled_pl_wait(n, t, u);
                    assert!((surv(w) - u).abs() < 1e-9, "n={n} t={t} u={u}");
                    assert!(w <= richardson_wait(u) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn large_n_waits_approach_exponential() {
        // pointwise the gap is about ln(u)^2 / 2n, so compare laws
        let mut r = Stream::new(12).rng();
        let us: Vec<f64> = (0..10_000).map(|_| r.uniform()).collect();
        let pl: Vec<f64> = us.iter().map(|&u| rescaled_pl_wait(64, 0.0, u)).collect();
        let rich: Vec<f64> = us.iter().map(|&u| richardson_wait(u)).collect();
        assert!(ks_two_sample(&pl, &rich).0 < 0.01);
        let sup = (0..2000).map(|i| i as f64 / 100.0).map(|s| (pow(1.0 - s / 64.0, 64.0) - libm::exp(-s)).abs()).fold(0.0, f64::max);
        assert!(sup < 0.01);
    }

    #[test]
    fn domination_on_a_few_seeds() {
        let o = Vertex::origin(2);
        let bbox = LatticeBox::centered(o, 15);
        for n in [1, 2, 4] {
            for seed in 0..20 {
                let run = coupled_explore_pl_richardson(n, seed, &o, &bbox, 8.0).unwrap();
                assert!(run.dominated, "n={n} seed={seed}: {:?}", run.first_violation);
            }
        }
    }
}
