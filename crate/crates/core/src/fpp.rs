//! Classical first-passage percolation with i.i.d. edge weights drawn from a
//! survival curve.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fcp::Tentative;
use crate::lattice::{neighbors, EdgeKey, LatticeBox, Vertex};
use crate::rng::Stream;
use crate::survival::SurvivalCurve;

const WEIGHT_WORD: u64 = 0xF1_0000;

#[derive(Clone, Debug, Default)]
pub struct DijkstraOptions {
    /// Permit `μ({0}) > 0` (zero-cost clusters).
    pub allow_zero_atom: bool,
    pub targets: Vec<Vertex>,
}

/// Passage times `D^{(μ)}(origin, ·)` over a box.
#[derive(Clone, Debug)]
pub struct FppField {
    origin: Vertex,
    horizon: f64,
    bbox: LatticeBox,
    passage: Vec<f64>,
    truncated: bool,
}

impl FppField {
    pub fn origin(&self) -> &Vertex {
        &self.origin
    }

    pub fn bbox(&self) -> &LatticeBox {
        &self.bbox
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn passage_time(&self, v: &Vertex) -> f64 {
        self.bbox.index(v).map_or(f64::INFINITY, |i| self.passage[i])
    }

    pub fn durations(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.passage.iter().enumerate().map(move |(i, d)| (self.bbox.vertex(i), *d))
    }

    /// `J^{(μ)}(t)`.
    pub fn reachable(&self, t: f64) -> Vec<Vertex> {
        self.durations().filter(|(_, d)| *d <= t).map(|(v, _)| v).collect()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }
}

/// The weight of `edge` under `(mu, seed)`: one uniform per canonical edge.
pub fn edge_weight(mu: &SurvivalCurve, seed: u64, edge: &EdgeKey) -> f64 {
    mu.sample_weight(Stream::new(seed).word(WEIGHT_WORD).edge(edge).uniform(0, 0))
}

pub fn dijkstra(mu: &SurvivalCurve, seed: u64, origin: &Vertex, bbox: &LatticeBox, horizon: f64) -> Result<FppField> {
    dijkstra_with(mu, seed, origin, bbox, horizon, &DijkstraOptions::default())
}

pub fn dijkstra_with(
    mu: &SurvivalCurve,
    seed: u64,
    origin: &Vertex,
    bbox: &LatticeBox,
    horizon: f64,
    options: &DijkstraOptions,
) -> Result<FppField> {
    let atom = mu.atom_at_zero();
    if atom > 0.0 && !options.allow_zero_atom {
        return Err(Error::ZeroAtomNotAllowed { atom });
    }
    shortest_paths(|e| edge_weight(mu, seed, e), origin, bbox, horizon, &options.targets)
}

/// Dijkstra over an arbitrary non-negative weight function.
pub fn shortest_paths<W: Fn(&EdgeKey) -> f64>(
    weight: W,
    origin: &Vertex,
    bbox: &LatticeBox,
    horizon: f64,
    targets: &[Vertex],
) -> Result<FppField> {
    let Some(start) = bbox.index(origin) else {
        return Err(Error::InvalidArgument(format!("origin {origin:?} lies outside the box")));
    };
    if !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be >= 0, got {horizon}")));
    }
    let n = bbox.len();
    let mut dist = alloc::vec![f64::INFINITY; n];
    let mut settled = alloc::vec![false; n];
    let mut left: Vec<usize> = targets.iter().filter_map(|v| bbox.index(v)).collect();
    let stop_early = !left.is_empty();
    let mut truncated = false;
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Tentative { time: 0.0, index: start });
    while let Some(Tentative { time, index }) = heap.pop() {
        if settled[index] {
            continue;
        }
        settled[index] = true;
        let v = bbox.vertex(index);
        if bbox.on_boundary(&v) {
            truncated = true;
        }
        if stop_early {
            left.retain(|&i| i != index);
            if left.is_empty() {
                break;
            }
        }
        for w in neighbors(&v) {
            let Some(j) = bbox.index(&w) else { continue };
            if settled[j] {
                continue;
            }
            let s = time + weight(&EdgeKey::new(&v, &w).expect("lattice neighbours"));
            if s <= horizon && s < dist[j] {
                dist[j] = s;
                heap.push(Tentative { time: s, index: j });
            }
        }
    }
    for (d, s) in dist.iter_mut().zip(&settled) {
        if !*s {
            *d = f64::INFINITY;
        }
    }
    Ok(FppField { origin: *origin, horizon, bbox: bbox.clone(), passage: dist, truncated })
}
