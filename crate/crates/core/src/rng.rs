//! Counter-based random numbers.
//!
//! A uniform is a pure function of a 64-bit key and a counter, so any draw can
//! be recomputed in isolation. Keys are built by folding words into a
//! [`Stream`]; the per-edge streams used by the contact models are
//! `Stream::new(seed).word(tag).edge(edge)` and individual draws are indexed by
//! `(day, slot)`.

use crate::lattice::EdgeKey;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps 64 random bits to a double strictly inside (0, 1).
#[inline]
pub fn to_open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// A keyed stream identifier. Cheap to copy and extend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(mix64(seed ^ 0x5851_F42D_4C95_7F2D))
    }

    /// Folds one more word into the key.
    #[inline]
    pub fn word(self, w: u64) -> Self {
        Stream(mix64(self.0.wrapping_add(GOLDEN) ^ mix64(w.wrapping_add(0x2545_F491_4F6C_DD1D))))
    }

    /// Folds a canonical edge into the key.
    pub fn edge(self, e: &EdgeKey) -> Self {
        let mut s = self.word(e.axis() as u64);
        for &c in e.lo().coords() {
            s = s.word(c as u64);
        }
        s
    }

    pub fn key(self) -> u64 {
        self.0
    }

    /// Raw 64-bit draw at `(day, slot)`.
    #[inline]
    pub fn bits(self, day: i64, slot: u64) -> u64 {
        let c = mix64((day as u64).wrapping_mul(GOLDEN) ^ slot.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        mix64(self.0 ^ c)
    }

    /// Uniform on (0, 1) at `(day, slot)`.
    #[inline]
    pub fn uniform(self, day: i64, slot: u64) -> f64 {
        to_open01(self.bits(day, slot))
    }

    /// Sequential generator over slots of day 0.
    pub fn rng(self) -> CounterRng {
        CounterRng { stream: self, counter: 0 }
    }
}

/// Sequential view over a [`Stream`]; the n-th draw equals `stream.uniform(0, n)`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    stream: Stream,
    counter: u64,
}

impl CounterRng {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let b = self.stream.bits(0, self.counter);
        self.counter += 1;
        b
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        to_open01(self.next_u64())
    }

    /// Exponential with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(self.uniform()) / rate
    }
}

/// Seed for replica `index` of a batch keyed by `seed`.
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    Stream::new(seed).word(0xA11C_E5EE_D000_0000).word(index).key()
}
