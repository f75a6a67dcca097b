//! Canonical charts of the planetary phase space.
//!
//! Every chart maps a flat coordinate vector, laid out as `3n` momenta
//! followed by their `3n` conjugate positions, to a [`CartesianState`] whose
//! flat layout is `(y, x)`. With that ordering all charts are canonical for
//! the same standard symplectic matrix (see [`symplectic`]).

use alloc::vec::Vec;

use crate::system::CartesianState;
use crate::two_body::{cartesian_to_elements, EllipseElements, SystemMasses};
use crate::Result;

mod delaunay;
mod poincare;
mod pstar;
pub mod symmetry;
pub mod symplectic;

pub use delaunay::{DelaunayChart, DelaunayCoords};
pub use poincare::{PoincareChart, PoincareCoords, SecularZ};
pub use pstar::{AngularChain, PStarChart, PStarCoord, PStarCoords};

/// Default guards keeping charts away from their singular sets.
pub const DEFAULT_E_MIN: f64 = 1e-3;
pub const DEFAULT_NODE_MIN: f64 = 1e-3;
pub const DEFAULT_INCLINATION_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChartId {
    Cartesian,
    Delaunay,
    Poincare,
    PStar,
}

impl ChartId {
    pub fn name(self) -> &'static str {
        match self {
            ChartId::Cartesian => "cartesian",
            ChartId::Delaunay => "delaunay",
            ChartId::Poincare => "poincare",
            ChartId::PStar => "pstar",
        }
    }
}

#[allow(clippy::wrong_self_convention)]
pub trait Chart {
    type Coords: Clone;

    fn id(&self) -> ChartId;

    /// Number of planets.
    fn n(&self) -> usize;

    fn to_cartesian(&self, coords: &Self::Coords) -> Result<CartesianState>;

    fn from_cartesian(&self, state: &CartesianState) -> Result<Self::Coords>;

    fn flatten(&self, coords: &Self::Coords) -> Vec<f64>;

    fn unflatten(&self, flat: &[f64]) -> Result<Self::Coords>;

    /// Which flat entries are angles (compared modulo 2π).
    fn angle_mask(&self) -> Vec<bool> {
        let n = self.n();
        (0..6 * n).map(|k| k >= 3 * n).collect()
    }
}

/// The identity chart on `(y, x)`.
#[derive(Debug, Clone, Copy)]
pub struct CartesianChart {
    pub n: usize,
}

impl Chart for CartesianChart {
    type Coords = CartesianState;

    fn id(&self) -> ChartId {
        ChartId::Cartesian
    }

    fn n(&self) -> usize {
        self.n
    }

    fn to_cartesian(&self, coords: &CartesianState) -> Result<CartesianState> {
        Ok(coords.clone())
    }

    fn from_cartesian(&self, state: &CartesianState) -> Result<CartesianState> {
        Ok(state.clone())
    }

    fn flatten(&self, coords: &CartesianState) -> Vec<f64> {
        coords.to_flat()
    }

    fn unflatten(&self, flat: &[f64]) -> Result<CartesianState> {
        CartesianState::from_flat(flat)
    }

    fn angle_mask(&self) -> Vec<bool> {
        alloc::vec![false; 6 * self.n]
    }
}

pub(crate) fn state_elements(state: &CartesianState, masses: &SystemMasses) -> Result<Vec<EllipseElements>> {
    if state.n() != masses.n() {
        return Err(crate::Error::Dimension {
            expected: masses.n(),
            got: state.n(),
        });
    }
    (0..state.n())
        .map(|i| cartesian_to_elements(&state.y[i], &state.x[i], masses, i))
        .collect()
}

pub(crate) fn elements_state(elements: &[EllipseElements], masses: &SystemMasses) -> Result<CartesianState> {
    let mut y = Vec::with_capacity(elements.len());
    let mut x = Vec::with_capacity(elements.len());
    for (i, el) in elements.iter().enumerate() {
        let (yi, xi) = crate::two_body::elements_to_cartesian(el, masses, i)?;
        y.push(yi);
        x.push(xi);
    }
    Ok(CartesianState { y, x })
}

pub(crate) fn split_blocks(flat: &[f64], n: usize) -> Result<[Vec<f64>; 6]> {
    if flat.len() != 6 * n {
        return Err(crate::Error::Dimension {
            expected: 6 * n,
            got: flat.len(),
        });
    }
    Ok(core::array::from_fn(|b| flat[b * n..(b + 1) * n].to_vec()))
}

pub(crate) fn join_blocks(blocks: [&[f64]; 6]) -> Vec<f64> {
    blocks.iter().flat_map(|b| b.iter().copied()).collect()
}
