//! Reflections and rotations of the phase space, and the parity checks
//! they imply for the averaged perturbation.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{PStarCoords, PoincareCoords, SecularZ};
use crate::geometry::{rotate_k, wrap_2pi};
use crate::system::CartesianState;
use crate::Result;

/// Sign patterns `(momenta, positions)` of the mirror `x₂ → −x₂` that acts
/// on the reduced chart as `(Θ, ϑ) → (−Θ, −ϑ)`.
pub const PSTAR_MIRROR: ([f64; 3], [f64; 3]) = ([1.0, -1.0, 1.0], [1.0, -1.0, 1.0]);

pub fn apply_reflection(coords: &PStarCoords) -> PStarCoords {
    coords.reflected()
}

pub fn mirror_cartesian(state: &CartesianState) -> CartesianState {
    state.reflect(PSTAR_MIRROR.0, PSTAR_MIRROR.1)
}

/// Coordinate-plane reflections and rotations about the third axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneSymmetry {
    /// `x → (−x₁, x₂, x₃)`, `y → (y₁, −y₂, −y₃)`
    FlipFirst,
    /// `x → (x₁, −x₂, x₃)`, `y → (−y₁, y₂, −y₃)`
    FlipSecond,
    /// `x → (x₁, x₂, −x₃)`, `y → (y₁, y₂, −y₃)`
    FlipThird,
    /// Rotation by the given angle about the third axis.
    Rotation(f64),
}

impl PlaneSymmetry {
    pub fn cartesian(self, s: &CartesianState) -> CartesianState {
        match self {
            PlaneSymmetry::FlipFirst => s.reflect([1.0, -1.0, -1.0], [-1.0, 1.0, 1.0]),
            PlaneSymmetry::FlipSecond => s.reflect([-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]),
            PlaneSymmetry::FlipThird => s.reflect([1.0, 1.0, -1.0], [1.0, 1.0, -1.0]),
            PlaneSymmetry::Rotation(g) => s.map(|v| rotate_k(g, v)),
        }
    }

    /// The same transformation expressed in Poincaré variables.
    pub fn poincare(self, c: &PoincareCoords) -> PoincareCoords {
        let mut out = c.clone();
        match self {
            PlaneSymmetry::FlipFirst => {
                out.mean_longitude.iter_mut().for_each(|l| *l = wrap_2pi(PI - *l));
                out.z = c.z.with_signs([-1.0, 1.0, 1.0, -1.0]);
            }
            PlaneSymmetry::FlipSecond => {
                out.mean_longitude.iter_mut().for_each(|l| *l = wrap_2pi(-*l));
                out.z = c.z.with_signs([1.0, -1.0, -1.0, 1.0]);
            }
            PlaneSymmetry::FlipThird => {
                out.z = c.z.with_signs([1.0, 1.0, -1.0, -1.0]);
            }
            PlaneSymmetry::Rotation(g) => {
                out.mean_longitude.iter_mut().for_each(|l| *l = wrap_2pi(*l + g));
                out.z = c.z.rotated(-g);
            }
        }
        out
    }
}

/// The three sign patterns on `(η, ξ, p, q)` left invariant by averaging.
pub const PARITY_PATTERNS: [[f64; 4]; 3] = [
    [1.0, -1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0],
];

#[derive(Debug, Clone, PartialEq)]
pub struct DalembertReport {
    /// Max absolute defect per entry of [`PARITY_PATTERNS`].
    pub parity_defects: [f64; 3],
    /// Max absolute defect under rotations of all pairs by a common angle.
    pub rotation_defect: f64,
    /// Euclidean norm of the central-difference gradient at `z = 0`.
    pub equilibrium_gradient: f64,
    pub value_at_origin: f64,
    pub samples: usize,
}

/// Evaluate the parity and rotation symmetries of an averaged perturbation
/// `f(z)` (actions held fixed by the caller) on `samples`.
pub fn dalembert_parity_test<F>(mut f: F, samples: &[SecularZ], angles: &[f64], grad_step: f64) -> Result<DalembertReport>
where
    F: FnMut(&SecularZ) -> Result<f64>,
{
    let mut parity = [0.0_f64; 3];
    let mut rotation = 0.0_f64;
    for z in samples {
        let base = f(z)?;
        for (d, signs) in parity.iter_mut().zip(PARITY_PATTERNS) {
            *d = d.max((f(&z.with_signs(signs))? - base).abs());
        }
        for &g in angles {
            rotation = rotation.max((f(&z.rotated(g))? - base).abs());
        }
    }
    let n = samples.first().map(|z| z.n()).unwrap_or(0);
    let zero = SecularZ::zeros(n);
    let value_at_origin = f(&zero)?;
    let mut grad: Vec<f64> = Vec::with_capacity(4 * n);
    for k in 0..4 * n {
        let mut flat = alloc::vec![0.0; 4 * n];
        flat[k] = grad_step;
        let plus = f(&SecularZ::from_flat(&flat)?)?;
        flat[k] = -grad_step;
        let minus = f(&SecularZ::from_flat(&flat)?)?;
        grad.push((plus - minus) / (2.0 * grad_step));
    }
    Ok(DalembertReport {
        parity_defects: parity,
        rotation_defect: rotation,
        equilibrium_gradient: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        value_at_origin,
        samples: samples.len(),
    })
}
