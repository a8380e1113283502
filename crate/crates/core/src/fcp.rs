//! Infection exploration: first-infection times `D_{t0}(o, v)` by
//! label-setting over increasing contact times.
//!
//! Every query `first_contact(e, t)` is non-decreasing in `t` and returns a
//! value `>= t`, so the earliest tentative arrival in the queue is final,
//! exactly as in Dijkstra's algorithm with time-dependent FIFO edges.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::contact::{ContactModel, ContactSource, SeededModel};
use crate::error::{Error, Result};
use crate::lattice::{EdgeKey, LatticeBox, Vertex};
use crate::rng::Stream;

/// Extra absolute time past `t0 + T` that realizations may look ahead.
pub const DEFAULT_LOOKAHEAD: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub lookahead: f64,
    /// Stop as soon as all of these are settled (or unreachable).
    pub targets: Vec<Vertex>,
    pub record_events: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { lookahead: DEFAULT_LOOKAHEAD, targets: Vec::new(), record_events: true }
    }
}

/// One infection: absolute time, vertex, and the edge it came through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfectionEvent {
    pub time: f64,
    pub vertex: Vertex,
    pub via: Option<EdgeKey>,
}

/// Queue entry, min-ordered by `(time, box index)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tentative {
    pub time: f64,
    pub index: usize,
}

impl PartialEq for Tentative {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Tentative {}

impl Ord for Tentative {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Tentative {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-infection times over a box.
#[derive(Clone, Debug)]
pub struct PassageField {
    origin: Vertex,
    start_time: f64,
    horizon: f64,
    bbox: LatticeBox,
    /// Absolute infection times, `+inf` where not reached.
    arrival: Vec<f64>,
    events: Vec<InfectionEvent>,
    truncated: bool,
}

impl PassageField {
    pub fn origin(&self) -> &Vertex {
        &self.origin
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn bbox(&self) -> &LatticeBox {
        &self.bbox
    }

    /// `D_{t0}(origin, v)`, `+inf` when not reached within the horizon or
    /// outside the box.
    pub fn infection_time(&self, v: &Vertex) -> f64 {
        match self.bbox.index(v) {
            Some(i) => self.arrival[i] - self.start_time,
            None => f64::INFINITY,
        }
    }

    /// Absolute infection time `t0 + D`.
    pub fn arrival_time(&self, v: &Vertex) -> f64 {
        self.bbox.index(v).map_or(f64::INFINITY, |i| self.arrival[i])
    }

    /// Infection times in box order.
    pub fn durations(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.arrival.iter().enumerate().map(move |(i, a)| (self.bbox.vertex(i), a - self.start_time))
    }

    pub fn event_log(&self) -> &[InfectionEvent] {
        &self.events
    }

    /// Some vertex on the box boundary was infected within the horizon.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn reachable(&self, t: f64) -> ReachableSet<'_> {
        ReachableSet { field: self, t }
    }

    pub fn reached_count(&self) -> usize {
        self.arrival.iter().filter(|a| a.is_finite()).count()
    }
}

/// `I_{t0}(origin, t) = {v : D_{t0}(origin, v) <= t}`.
#[derive(Clone, Copy, Debug)]
pub struct ReachableSet<'a> {
    field: &'a PassageField,
    t: f64,
}

impl<'a> ReachableSet<'a> {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.field.infection_time(v) <= self.t
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        self.field.durations().filter(|(_, d)| *d <= self.t).map(|(v, _)| v).collect()
    }

    pub fn len(&self) -> usize {
        self.field.durations().filter(|(_, d)| *d <= self.t).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Explores the infection from `origin` at absolute time `t0` for `horizon`
/// time units inside `bbox`.
pub fn explore(
    model: &ContactModel,
    seed: u64,
    origin: &Vertex,
    t0: f64,
    horizon: f64,
    bbox: &LatticeBox,
) -> Result<PassageField> {
    explore_with(model, seed, origin, t0, horizon, bbox, &ExploreOptions::default())
}

pub fn explore_with(
    model: &ContactModel,
    seed: u64,
    origin: &Vertex,
    t0: f64,
    horizon: f64,
    bbox: &LatticeBox,
    options: &ExploreOptions,
) -> Result<PassageField> {
    model.validate()?;
    let source = SeededModel::new(model, seed, t0 + horizon + options.lookahead);
    explore_source(&source, origin, t0, horizon, bbox, options)
}

/// Label-setting exploration over an arbitrary contact source. Queries past
/// the source's lookahead are treated as "no contact".
pub fn explore_source<S: ContactSource + ?Sized>(
    source: &S,
    origin: &Vertex,
    t0: f64,
    horizon: f64,
    bbox: &LatticeBox,
    options: &ExploreOptions,
) -> Result<PassageField> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be >= 0, got {horizon}")));
    }
    label_setting(origin, t0, horizon, bbox, options, |_, edge, time| match source.first_contact(edge, time) {
        Ok(s) => Ok(Some(s)),
        Err(Error::HorizonExhausted { .. }) => Ok(None),
        Err(e) => Err(e),
    })
}

/// Exploration in which every edge is queried exactly once, when its first
/// endpoint is infected: `next(revealer, edge, s)` returns the traversal time
/// of `edge` for an infection that reached `revealer` at absolute time `s`.
/// This suffices for first-infection times because an edge whose second
/// endpoint is already infected is never used.
pub fn explore_by_reveal<F>(origin: &Vertex, t0: f64, horizon: f64, bbox: &LatticeBox, mut next: F) -> Result<PassageField>
where
    F: FnMut(&Vertex, &EdgeKey, f64) -> Result<f64>,
{
    label_setting(origin, t0, horizon, bbox, &ExploreOptions::default(), |v, e, t| next(v, e, t).map(Some))
}

const NO_PARENT: u8 = u8::MAX;

// parent code: 2 * axis + (1 if the parent sits at +1 along axis)
fn parent_edge(w: &Vertex, code: u8) -> Option<EdgeKey> {
    if code == NO_PARENT {
        return None;
    }
    let axis = (code / 2) as usize;
    let step = if code % 2 == 1 { 1 } else { -1 };
    EdgeKey::new(w, &w.with_coord(axis, w.coord(axis) + step))
}

fn label_setting<F>(
    origin: &Vertex,
    t0: f64,
    horizon: f64,
    bbox: &LatticeBox,
    options: &ExploreOptions,
    mut next: F,
) -> Result<PassageField>
where
    F: FnMut(&Vertex, &EdgeKey, f64) -> Result<Option<f64>>,
{
    let Some(start) = bbox.index(origin) else {
        return Err(Error::InvalidArgument(format!("origin {origin:?} lies outside the box")));
    };
    let d = bbox.dim();
    let strides = bbox.strides();
    let limit = t0 + horizon;
    let n = bbox.len();
    let mut arrival = alloc::vec![f64::INFINITY; n];
    let mut parent = alloc::vec![NO_PARENT; n];
    let mut settled = alloc::vec![false; n];
    let mut events = Vec::new();
    let mut truncated = false;
    let target_idx: Vec<usize> = options.targets.iter().filter_map(|v| bbox.index(v)).collect();
    let mut targets_left = target_idx.len();
    let mut is_target = alloc::vec![false; if target_idx.is_empty() { 0 } else { n }];
    for &i in &target_idx {
        is_target[i] = true;
    }

    let mut heap = BinaryHeap::new();
    arrival[start] = t0;
    heap.push(Tentative { time: t0, index: start });
    while let Some(Tentative { time, index }) = heap.pop() {
        if settled[index] {
            continue;
        }
        settled[index] = true;
        let v = bbox.vertex(index);
        if options.record_events {
            events.push(InfectionEvent { time, vertex: v, via: parent_edge(&v, parent[index]) });
        }
        if bbox.on_boundary(&v) {
            truncated = true;
        }
        if !is_target.is_empty() && is_target[index] {
            is_target[index] = false;
            targets_left -= 1;
            if targets_left == 0 {
                break;
            }
        }
        for axis in 0..d {
            let c = v.coord(axis);
            for (step, code) in [(-1i64, 1u8), (1, 0)] {
                let cw = c + step;
                if cw < bbox.lo().coord(axis) || cw > bbox.hi().coord(axis) {
                    continue;
                }
                let j = if step < 0 { index - strides[axis] } else { index + strides[axis] };
                if settled[j] {
                    continue;
                }
                let w = v.with_coord(axis, cw);
                let edge = EdgeKey::new(&v, &w).expect("lattice neighbours");
                let Some(s) = next(&v, &edge, time)? else { continue };
                if s <= limit && s < arrival[j] {
                    arrival[j] = s;
                    parent[j] = 2 * axis as u8 + code;
                    heap.push(Tentative { time: s, index: j });
                }
            }
        }
    }
    // tentative labels that never settled (early stop) are not final
    for (a, s) in arrival.iter_mut().zip(&settled) {
        if !*s {
            *a = f64::INFINITY;
        }
    }
    Ok(PassageField {
        origin: *origin,
        start_time: t0,
        horizon,
        bbox: bbox.clone(),
        arrival,
        events,
        truncated,
    })
}

/// A path with its witnessing contact times.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub vertices: Vec<Vertex>,
    pub times: Vec<f64>,
}

/// Greedy traversal time of `path` from absolute time `t0`; greedy is optimal
/// along a fixed path because first-contact queries are monotone.
pub fn travel_time<S: ContactSource + ?Sized>(source: &S, path: &[Vertex], t0: f64) -> Result<(f64, Path)> {
    let mut t = t0;
    let mut times = Vec::with_capacity(path.len().saturating_sub(1));
    for w in path.windows(2) {
        let edge = EdgeKey::new(&w[0], &w[1])
            .ok_or_else(|| Error::InvalidArgument(format!("{:?} and {:?} are not adjacent", w[0], w[1])))?;
        t = source.first_contact(&edge, t)?;
        times.push(t);
        if t.is_infinite() {
            break;
        }
    }
    Ok((t - t0, Path { vertices: path.to_vec(), times }))
}

/// Result of [`run_length_oracle`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunLength {
    pub mean: f64,
    /// `tail[j]` is the empirical `P(τ >= j)`.
    pub tail: Vec<f64>,
    pub samples: usize,
}

/// Direct simulation of `τ`, the number of consecutive edges of a straight
/// path crossed within one day started at the day boundary, when each edge
/// has `n` fresh uniform contact times in that day.
pub fn run_length_oracle(n: u32, samples: usize, seed: u64) -> Result<RunLength> {
    if n == 0 {
        return Err(Error::InvalidArgument(format!("n must be >= 1")));
    }
    let mut counts: Vec<usize> = Vec::new();
    let mut total = 0usize;
    for k in 0..samples {
        let mut rng = Stream::new(seed).word(0x7A0).word(k as u64).rng();
        let mut t = 0.0;
        let mut tau = 0usize;
        loop {
            let mut next = f64::INFINITY;
            for _ in 0..n {
                let u = rng.uniform();
                if u >= t && u < next {
                    next = u;
                }
            }
            if next.is_infinite() {
                break;
            }
            t = next;
            tau += 1;
        }
        if counts.len() <= tau {
            counts.resize(tau + 1, 0);
        }
        counts[tau] += 1;
        total += tau;
    }
    let mut tail = alloc::vec![0.0; counts.len() + 1];
    let mut acc = 0usize;
    for j in (0..counts.len()).rev() {
        acc += counts[j];
        tail[j] = acc as f64 / samples as f64;
    }
    Ok(RunLength { mean: total as f64 / samples as f64, tail, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::stationarize;
    use crate::lattice::neighbors;
    use alloc::vec;

    /// SL(1) with every offset at 0.5.
    struct HalfDay;

    impl ContactSource for HalfDay {
        fn first_contact(&self, _edge: &EdgeKey, t: f64) -> Result<f64> {
            let day = libm::floor(t);
            Ok(if t <= day + 0.5 { day + 0.5 } else { day + 1.5 })
        }
    }

    fn v1(x: i64) -> Vertex {
        Vertex::new(&[x])
    }

    fn v2(x: i64, y: i64) -> Vertex {
        Vertex::new(&[x, y])
    }

    #[test]
    fn travel_time_examples() {
        let (t, p) = travel_time(&HalfDay, &[v1(0)], 0.0).unwrap();
        assert_eq!(t, 0.0);
        assert!(p.times.is_empty());
        let path = [v1(0), v1(1), v1(2)];
        // equal contact times relay within the same instant
        assert_eq!(travel_time(&HalfDay, &path, 0.0).unwrap().0, 0.5);
        let (t, p) = travel_time(&HalfDay, &path, 0.6).unwrap();
        assert!((t - 0.9).abs() < 1e-12);
        assert_eq!(p.times, vec![1.5, 1.5]);
        assert!(travel_time(&HalfDay, &[v1(0), v1(2)], 0.0).is_err());
    }

    #[test]
    fn deterministic_chain() {
        let bbox = LatticeBox::centered(v1(0), 12);
        let f = explore_source(&HalfDay, &v1(0), 0.0, 20.0, &bbox, &ExploreOptions::default()).unwrap();
        assert_eq!(f.infection_time(&v1(0)), 0.0);
        for k in 1..=12 {
            assert_eq!(f.infection_time(&v1(k)), 0.5);
            assert_eq!(f.infection_time(&v1(-k)), 0.5);
        }
        let late = explore_source(&HalfDay, &v1(0), 0.7, 20.0, &bbox, &ExploreOptions::default()).unwrap();
        assert!((late.infection_time(&v1(9)) - 0.8).abs() < 1e-12);
        assert!(f.is_truncated());
    }

    #[test]
    fn full_line_gives_instant_infection() {
        let m = ContactModel::cox(1.0, ContactModel::poisson(1.0));
        let bbox = LatticeBox::centered(v2(0, 0), 4);
        let f = explore(&m, 3, &v2(0, 0), 0.0, 0.0, &bbox).unwrap();
        assert_eq!(f.reachable(0.0).len(), bbox.len());
        // ties resolved in lexicographic order among equal times
        let log = f.event_log();
        assert_eq!(log[0].vertex, v2(0, 0));
        assert!(log.iter().all(|e| e.time == 0.0));
    }

    #[test]
    fn event_log_invariants() {
        let m = ContactModel::perturbed(2);
        let bbox = LatticeBox::centered(v2(0, 0), 10);
        let f = explore(&m, 8, &v2(0, 0), 0.3, 6.0, &bbox).unwrap();
        let log = f.event_log();
        for w in log.windows(2) {
            assert!(w[0].time <= w[1].time);
        }
        let src = SeededModel::new(&m, 8, 100.0);
        for e in &log[1..] {
            let edge = e.via.unwrap();
            let parent = if edge.lo() == &e.vertex { edge.hi() } else { *edge.lo() };
            let pa = f.arrival_time(&parent);
            assert!(pa <= e.time);
            assert_eq!(src.first_contact(&edge, pa).unwrap(), e.time);
        }
        assert_eq!(f.reached_count(), log.len());
    }

    #[test]
    fn triangle_inequality_holds_exactly() {
        let models = [ContactModel::perturbed(1), ContactModel::poisson(1.0), ContactModel::stationarized(2)];
        for (mi, m) in models.iter().enumerate() {
            for seed in 0..20u64 {
                let bbox = LatticeBox::centered(v2(0, 0), 3);
                let src = SeededModel::new(m, seed, 1e9);
                let opts = ExploreOptions::default();
                let x = bbox.vertex((seed as usize * 7 + mi) % bbox.len());
                let fx = explore_source(&src, &x, 0.0, 1e6, &bbox, &opts).unwrap();
                for y in bbox.vertices() {
                    let dxy = fx.infection_time(&y);
                    let fy = explore_source(&src, &y, dxy, 1e6, &bbox, &opts).unwrap();
                    for z in bbox.vertices() {
                        assert!(fx.infection_time(&z) <= dxy + fy.infection_time(&z) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn perturbed_passage_times_are_asymmetric() {
        let m = ContactModel::perturbed(1);
        let bbox = LatticeBox::centered(v1(0), 6);
        let mut found = false;
        for seed in 0..100 {
            let a = explore(&m, seed, &v1(0), 0.0, 50.0, &bbox).unwrap();
            let b = explore(&m, seed, &v1(3), 0.0, 50.0, &bbox).unwrap();
            if a.infection_time(&v1(3)) != b.infection_time(&v1(0)) {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn integer_day_lipschitz_for_lattice_models() {
        let models = [ContactModel::perturbed(1), ContactModel::perturbed(3), ContactModel::stationarized(1)];
        for m in &models {
            for seed in 0..30 {
                let bbox = LatticeBox::centered(v2(0, 0), 8);
                let f = explore(m, seed, &v2(0, 0), 0.0, 40.0, &bbox).unwrap();
                for v in bbox.vertices() {
                    for w in neighbors(&v) {
                        if !bbox.contains(&w) {
                            continue;
                        }
                        let (a, b) = (f.infection_time(&v), f.infection_time(&w));
                        assert!((libm::ceil(a) - libm::ceil(b)).abs() <= 1.0, "{m:?} {v:?} {w:?}: {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn confinement_in_two_dimensions() {
        // one edge per day at most e-fold faster than the mean: the
        // infection at t = 20 stays far inside 20 * 2de * 1.5
        let m = ContactModel::perturbed(1);
        let t = 20.0;
        let bound = t * 2.0 * 2.0 * core::f64::consts::E * 1.5;
        let bbox = LatticeBox::centered(v2(0, 0), 90);
        for seed in 0..200 {
            let f = explore(&m, seed, &v2(0, 0), 0.0, t, &bbox).unwrap();
            assert!(!f.is_truncated());
            for v in f.reachable(t).vertices() {
                assert!((v.coord(0).abs().max(v.coord(1).abs()) as f64) <= bound);
            }
        }
    }

    #[test]
    fn run_length_n1_factorial_tail() {
        let r = run_length_oracle(1, 200_000, 5).unwrap();
        let mut fact = 1.0;
        for j in 1..=5 {
            fact *= j as f64;
            assert!((r.tail[j] - 1.0 / fact).abs() < 0.004, "{j}: {}", r.tail[j]);
        }
        assert!((r.mean - (core::f64::consts::E - 1.0)).abs() < 0.01);
        assert_eq!(r.tail[0], 1.0);
    }

    #[test]
    fn horizon_cuts_exploration() {
        let m = ContactModel::perturbed(1);
        let bbox = LatticeBox::centered(v1(0), 50);
        let f = explore(&m, 4, &v1(0), 0.0, 5.0, &bbox).unwrap();
        for (v, d) in f.durations() {
            if d.is_finite() {
                assert!(d <= 5.0);
                // one edge per day at least, at most e-ish per day on average
                assert!(v.l1() as f64 <= 5.0 * 10.0);
            }
        }
        assert!(!f.is_truncated());
        assert!(stationarize(&m).is_ok());
    }

    #[test]
    fn early_stop_at_targets() {
        let m = ContactModel::perturbed(1);
        let bbox = LatticeBox::centered(v1(0), 100);
        let full = explore(&m, 9, &v1(0), 0.0, 80.0, &bbox).unwrap();
        let opts = ExploreOptions { targets: vec![v1(20)], ..ExploreOptions::default() };
        let part = explore_with(&m, 9, &v1(0), 0.0, 80.0, &bbox, &opts).unwrap();
        assert_eq!(part.infection_time(&v1(20)), full.infection_time(&v1(20)));
        assert!(part.reached_count() < full.reached_count());
    }

    #[test]
    fn invalid_arguments() {
        let m = ContactModel::perturbed(1);
        let bbox = LatticeBox::centered(v1(0), 3);
        assert!(explore(&m, 0, &v1(5), 0.0, 1.0, &bbox).is_err());
        assert!(explore(&m, 0, &v1(0), 0.0, -1.0, &bbox).is_err());
        assert!(run_length_oracle(0, 10, 0).is_err());
    }
}
