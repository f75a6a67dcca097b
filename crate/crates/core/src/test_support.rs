//! Random configurations shared by unit tests.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{circ_dist, rotate_about, Vec3};
use crate::system::CartesianState;
use crate::two_body::{elements_to_cartesian, EllipseElements, SystemMasses};

pub const AXES: [f64; 4] = [1.0, 2.3, 5.1, 11.0];

pub fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let r = v.norm();
        if r > 0.1 && r < 1.0 {
            return v / r;
        }
    }
}

/// Ellipse with the given normal and a random perihelion in its plane.
pub fn ellipse(rng: &mut ChaCha8Rng, a: f64, e: f64, normal: Vec3) -> EllipseElements {
    let seed = unit(rng);
    let perihelion = (seed - normal * normal.dot(&seed)).normalize();
    EllipseElements {
        a,
        e,
        perihelion,
        normal,
        mean_anomaly: rng.random_range(0.0..TAU),
    }
}

/// Random spatial configuration with eccentricities in `e_range` and
/// normals within `max_tilt` of a random common direction.
pub fn elements(
    rng: &mut ChaCha8Rng,
    n: usize,
    e_range: core::ops::Range<f64>,
    max_tilt: f64,
) -> Vec<EllipseElements> {
    let base = unit(rng);
    elements_about(rng, base, n, e_range, max_tilt)
}

/// As [`elements`], with normals within `max_tilt` of `base`.
pub fn elements_about(
    rng: &mut ChaCha8Rng,
    base: Vec3,
    n: usize,
    e_range: core::ops::Range<f64>,
    max_tilt: f64,
) -> Vec<EllipseElements> {
    (0..n)
        .map(|i| {
            let axis = base.cross(&unit(rng)).normalize();
            let normal = rotate_about(&axis, rng.random::<f64>() * max_tilt, &base);
            let e = rng.random_range(e_range.clone());
            ellipse(rng, AXES[i], e, normal)
        })
        .collect()
}

pub fn state(els: &[EllipseElements], masses: &SystemMasses) -> CartesianState {
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (i, el) in els.iter().enumerate() {
        let (yi, xi) = elements_to_cartesian(el, masses, i).unwrap();
        y.push(yi);
        x.push(xi);
    }
    CartesianState { y, x }
}

/// Max difference between flat coordinate vectors, angles taken mod 2π,
/// non-angles relative to `scale`.
pub fn flat_distance(a: &[f64], b: &[f64], angle_mask: &[bool], scale: f64) -> f64 {
    a.iter()
        .zip(b)
        .zip(angle_mask)
        .map(|((u, v), &ang)| if ang { circ_dist(*u, *v) } else { (u - v).abs() / scale })
        .fold(0.0, f64::max)
}
