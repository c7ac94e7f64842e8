//! Lattice-point counting and angle statistics for the principal congruence
//! subgroups `Γ(N)` of `SL₂(ℤ)` acting on the upper half-plane.
//!
//! The modules are layered: [`geometry`] handles points, distances and the
//! angle observable; [`group`] enumerates orbit balls and sectors; [`arith`]
//! holds the number-theoretic side (Kloosterman sums, `Φ_N`, congruence box
//! counts); [`theory`] evaluates closed forms; [`stats`] compares the two.

pub mod arith;
pub mod cli;
pub mod format;
pub mod geometry;
pub mod group;
pub mod oracle;
pub mod stats;
pub mod theory;
pub mod verify;

pub use geometry::{Angle, NormalizedTarget, Point};
pub use group::{BallSpec, GroupElement, SectorSpec, Workers};
pub use theory::TheoryContext;
