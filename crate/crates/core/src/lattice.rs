//! `Z^d` geometry: vertices, canonical undirected edges, finite boxes, norms
//! and the rounding map `x -> [x]`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// A lattice site. Coordinates beyond `dim` are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    coords: [i64; MAX_DIM],
    dim: u8,
}

impl Vertex {
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Vertex { coords: c, dim: coords.len() as u8 }
    }

    pub fn origin(dim: usize) -> Self {
        Vertex::new(&[0; MAX_DIM][..dim])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i64 {
        self.coords[axis]
    }

    pub fn with_coord(mut self, axis: usize, value: i64) -> Self {
        self.coords[axis] = value;
        self
    }

    pub fn l1(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Vertex) -> i64 {
        self.coords().iter().zip(other.coords()).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords().iter().map(|&c| c as f64).collect()
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coords().cmp(other.coords())
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<i64> = Vec::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(D::Error::custom("vertex dimension out of range"));
        }
        Ok(Vertex::new(&v))
    }
}

/// The `2d` nearest neighbours of `v` in lexicographic order.
pub fn neighbors(v: &Vertex) -> Vec<Vertex> {
    let d = v.dim();
    let mut out = Vec::with_capacity(2 * d);
    for axis in 0..d {
        out.push(v.with_coord(axis, v.coord(axis) - 1));
        out.push(v.with_coord(axis, v.coord(axis) + 1));
    }
    out.sort();
    out
}

/// Nearest lattice point; ties round half-up in each coordinate.
pub fn round_to_lattice(x: &[f64]) -> Vertex {
    let c: Vec<i64> = x.iter().map(|&xi| libm::floor(xi + 0.5) as i64).collect();
    Vertex::new(&c)
}

/// `(|x|_1, |x|_inf)`.
pub fn norms(x: &[f64]) -> (f64, f64) {
    x.iter().fold((0.0, 0.0), |(l1, linf), &xi| {
        let a = libm::fabs(xi);
        (l1 + a, if a > linf { a } else { linf })
    })
}

/// Canonical undirected nearest-neighbour edge: `lo < hi` lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeKey {
    lo: Vertex,
    axis: u8,
}

impl EdgeKey {
    /// `None` unless `u` and `v` are nearest neighbours.
    pub fn new(u: &Vertex, v: &Vertex) -> Option<EdgeKey> {
        if u.dim() != v.dim() || u.l1_distance(v) != 1 {
            return None;
        }
        let axis = (0..u.dim()).find(|&a| u.coord(a) != v.coord(a))?;
        let lo = if u < v { *u } else { *v };
        Some(EdgeKey { lo, axis: axis as u8 })
    }

    /// The edge from `lo` in the positive direction of `axis`.
    pub fn from_lo(lo: Vertex, axis: usize) -> EdgeKey {
        assert!(axis < lo.dim());
        EdgeKey { lo, axis: axis as u8 }
    }

    pub fn lo(&self) -> &Vertex {
        &self.lo
    }

    pub fn hi(&self) -> Vertex {
        let a = self.axis as usize;
        self.lo.with_coord(a, self.lo.coord(a) + 1)
    }

    pub fn axis(&self) -> usize {
        self.axis as usize
    }
}

/// Axis-aligned finite window `lo ..= hi` (componentwise).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    lo: Vertex,
    hi: Vertex,
}

impl LatticeBox {
    /// The cube of `(2 radius + 1)^d` sites centred at `center`.
    pub fn centered(center: Vertex, radius: u32) -> Self {
        let r = radius as i64;
        let lo = Vertex::new(&center.coords().iter().map(|c| c - r).collect::<Vec<_>>());
        let hi = Vertex::new(&center.coords().iter().map(|c| c + r).collect::<Vec<_>>());
        LatticeBox { lo, hi }
    }

    /// Rectangular window; `None` if some `lo[a] > hi[a]`.
    pub fn from_corners(lo: Vertex, hi: Vertex) -> Option<Self> {
        if lo.dim() != hi.dim() || (0..lo.dim()).any(|a| lo.coord(a) > hi.coord(a)) {
            return None;
        }
        Some(LatticeBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Vertex {
        &self.lo
    }

    pub fn hi(&self) -> &Vertex {
        &self.hi
    }

    /// Radius of a centred cube, `None` for other windows.
    pub fn radius(&self) -> Option<u32> {
        let r = self.hi.coord(0) - self.lo.coord(0);
        let cubic = (0..self.dim()).all(|a| self.hi.coord(a) - self.lo.coord(a) == r);
        (cubic && r % 2 == 0).then_some((r / 2) as u32)
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi.coord(axis) - self.lo.coord(axis) + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        v.dim() == self.dim()
            && (0..self.dim()).all(|a| v.coord(a) >= self.lo.coord(a) && v.coord(a) <= self.hi.coord(a))
    }

    pub fn on_boundary(&self, v: &Vertex) -> bool {
        (0..self.dim()).any(|a| v.coord(a) == self.lo.coord(a) || v.coord(a) == self.hi.coord(a))
    }

    /// Row-major index with axis 0 most significant, so index order equals
    /// lexicographic vertex order.
    pub fn index(&self, v: &Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let mut idx = 0usize;
        for a in 0..self.dim() {
            idx = idx * self.extent(a) + (v.coord(a) - self.lo.coord(a)) as usize;
        }
        Some(idx)
    }

    pub fn vertex(&self, mut idx: usize) -> Vertex {
        let d = self.dim();
        let mut c = [0i64; MAX_DIM];
        for a in (0..d).rev() {
            let e = self.extent(a);
            c[a] = self.lo.coord(a) + (idx % e) as i64;
            idx /= e;
        }
        Vertex::new(&c[..d])
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len()).map(move |i| self.vertex(i))
    }

    /// Index strides per axis.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = alloc::vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.extent(a + 1);
        }
        s
    }
}
