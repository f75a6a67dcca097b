//! Numerical laboratory for the planetary (1+n)-body problem.
//!
//! The crate is `no_std` (with `alloc`). It contains:
//!
//! - [`two_body`]: Kepler's equation, ellipse geometry and the Kepler map
//!   between elements and heliocentric Cartesian variables.
//! - [`system`]: the heliocentric Hamiltonian, split into Keplerian, direct
//!   and indirect parts, with its analytic gradient.
//! - [`charts`]: Delaunay, Poincaré and the symmetric SO(3)-reducing chart
//!   `(Λ, χ, Θ, ℓ, κ, ϑ)` built on partial angular-momentum sums, plus
//!   symmetry actions and a finite-difference symplecticity tester.
//! - [`secular`]: averages over mean anomalies, Legendre order terms,
//!   dependence probes and quadrupole phase portraits.
//! - [`birkhoff`]: first-order Birkhoff invariants at the co-circular,
//!   co-planar point and the secular-degeneracy checks.
//! - [`diophantine`]: multi-scale Diophantine sets and the KAM budget.
//! - [`dynamics`]: Gauss collocation and Kepler splitting integrators.
//!
//! Units are G = 1. Angles are radians in `[0, 2π)`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod birkhoff;
pub mod charts;
pub mod diophantine;
pub mod dynamics;
mod error;
pub mod geometry;
pub mod secular;
pub mod system;
pub mod two_body;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use geometry::Vec3;
pub use system::{CartesianState, HamiltonianValue, PlanetarySystem};
pub use two_body::{EllipseElements, SystemMasses};
