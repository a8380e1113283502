//! First-contact percolation (FCP) on `Z^d`.
//!
//! Edges carry random closed sets of contact times; the infection may only
//! cross an edge at a contact time not earlier than its arrival at the
//! edge's endpoint. This crate holds the algorithmic core: lazily realized
//! contact-time models, the label-setting exploration that computes
//! first-infection times, classical first-passage percolation, the
//! correspondence between the two, the monotone couplings, and
//! inverse-speed / limiting-shape estimators.
//!
//! The crate is `no_std` (with `alloc`). Everything random is derived from a
//! counter-based generator keyed by `(seed, edge, day, slot)`, so results do
//! not depend on the order in which edges are queried.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contact;
pub mod correspondence;
pub mod couplings;
pub mod error;
pub mod exec;
pub mod fcp;
pub mod fpp;
pub mod lattice;
pub mod laws;
pub mod math;
pub mod rng;
pub mod shape;
pub mod stats;
pub mod survival;

pub use contact::{ContactModel, ContactSet, EdgeRealization};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use fcp::{explore, ExploreOptions, PassageField};
pub use fpp::{dijkstra, FppField};
pub use lattice::{EdgeKey, LatticeBox, Vertex};
pub use laws::{AtomFreeLaw, InterArrivalSpec, MixtureSpec};
pub use shape::{DirectionalSpeed, ShapeEstimate};
pub use survival::SurvivalCurve;
