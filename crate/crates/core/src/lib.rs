//! Approximate arbitrary pattern formation by point robots with inaccurate
//! movements.
//!
//! The crate is split along the pipeline of a simulation run:
//!
//! - [`geometry`]: tolerance-aware planar primitives (minimum enclosing
//!   circles, cones, circle families, composable region predicates).
//! - [`analysis`]: configuration analysis — view strings, symmetry
//!   classification, symmetry safety, the phase predicates and the bounding
//!   structure of a target pattern.
//! - [`motion`]: the inaccurate movement model (direction/extent errors
//!   bounded by `min(delta, lambda*d)`) and the safe-zone step planner.
//! - [`protocol`]: the deterministic Look-Compute decision function for the
//!   three-phase formation algorithm, plus the two-light wrapper for
//!   asynchronous robots.
//! - [`sim`]: round-based (FSYNC/SSYNC) and event-based (ASYNC) execution
//!   engines with per-activation random frames, error injection, runtime
//!   monitors and trace recording.
//! - [`verify`]: independent oracles — epsilon-closeness by embedding
//!   search, brute-force symmetry detection, brute-force minimum enclosing
//!   circles.
//!
//! `no_std` + `alloc`; all operations are pure and deterministic.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod geometry;
pub mod motion;
pub mod protocol;
pub mod sim;
pub mod verify;

pub use geometry::{Circle, Point, Region, TOL};
