//! Seed splitting and random configurations.
//!
//! A run has one master seed. Work item `k` of an experiment draws from
//! ChaCha8 stream `(tag << 40) | k` of that seed, where `tag` names the
//! kind of work (chart, planet count, …). Streams never overlap, so items
//! can run in any order on any thread.

use std::f64::consts::TAU;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use planetlab_core::geometry::rotate_about;
use planetlab_core::two_body::elements_to_cartesian;
use planetlab_core::{CartesianState, EllipseElements, SystemMasses, Vec3};

pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 40) | index);
    rng
}

/// Seed for core routines that take a `u64`, derived from a stream.
pub fn derived_seed(seed: u64, tag: u64) -> u64 {
    stream(seed, tag, 0).random()
}

pub fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r = v.norm();
        if r > 0.1 && r < 1.0 {
            return v / r;
        }
    }
}

/// Ellipse with the given normal and a random perihelion and mean anomaly.
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

/// Ellipses on `axes` whose normals lie within `max_tilt` of `base`.
pub fn elements_about(
    rng: &mut ChaCha8Rng,
    base: Vec3,
    axes: &[f64],
    e_range: Range<f64>,
    max_tilt: f64,
) -> Vec<EllipseElements> {
    axes.iter()
        .map(|&a| {
            let hinge = base.cross(&unit(rng)).normalize();
            let normal = rotate_about(&hinge, rng.random::<f64>() * max_tilt, &base);
            let e = rng.random_range(e_range.clone());
            ellipse(rng, a, e, normal)
        })
        .collect()
}

/// As [`elements_about`] around a random direction.
pub fn elements(rng: &mut ChaCha8Rng, axes: &[f64], e_range: Range<f64>, max_tilt: f64) -> Vec<EllipseElements> {
    let base = unit(rng);
    elements_about(rng, base, axes, e_range, max_tilt)
}

pub fn state(els: &[EllipseElements], masses: &SystemMasses) -> planetlab_core::Result<CartesianState> {
    let mut y = Vec::with_capacity(els.len());
    let mut x = Vec::with_capacity(els.len());
    for (i, el) in els.iter().enumerate() {
        let (yi, xi) = elements_to_cartesian(el, masses, i)?;
        y.push(yi);
        x.push(xi);
    }
    Ok(CartesianState { y, x })
}

/// Axes `1, 1/r₁, 1/(r₁r₂), …` with ratios drawn from `ratio`.
pub fn spaced_axes(rng: &mut ChaCha8Rng, n: usize, ratio: Range<f64>) -> Vec<f64> {
    let mut a = vec![1.0];
    for _ in 1..n {
        let last = *a.last().expect("non-empty");
        a.push(last / rng.random_range(ratio.clone()));
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 1, 3).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b: u64 = stream(7, 1, 4).random();
        let c: u64 = stream(7, 2, 3).random();
        let d: u64 = stream(8, 1, 3).random();
        assert!(a[0] != b && a[0] != c && a[0] != d);
    }

    #[test]
    fn sampled_ellipses_are_valid() {
        let mut rng = stream(1, 0, 0);
        for _ in 0..100 {
            for el in elements(&mut rng, &[1.0, 2.0, 4.0], 0.0..0.9, 1.5) {
                el.validate().unwrap();
            }
        }
    }
}
