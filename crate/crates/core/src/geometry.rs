//! Small vector and angle helpers shared by the charts.

use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub type Vec3 = nalgebra::Vector3<f64>;

pub fn e1() -> Vec3 {
    Vec3::new(1.0, 0.0, 0.0)
}

pub fn e2() -> Vec3 {
    Vec3::new(0.0, 1.0, 0.0)
}

pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let mut r = x % TAU;
    if r < 0.0 {
        r += TAU;
    }
    // the shift can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce an angle to `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_2pi(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Oriented angle from `a` to `b`, counterclockwise around the axis `v`.
///
/// Both vectors are projected on the plane orthogonal to `v`; the result is
/// in `[0, 2π)`.
pub fn oriented_angle(v: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let v = v.normalize();
    let sin = a.cross(b).dot(&v);
    let cos = a.dot(b) - a.dot(&v) * b.dot(&v);
    wrap_2pi(sin.atan2(cos))
}

/// Sine of the angle between two vectors; zero when either vanishes.
pub fn sin_between(a: &Vec3, b: &Vec3) -> f64 {
    let den = a.norm() * b.norm();
    if den == 0.0 {
        0.0
    } else {
        a.cross(b).norm() / den
    }
}

/// Rotate `v` by `angle` counterclockwise around the unit axis `u`.
pub fn rotate_about(u: &Vec3, angle: f64, v: &Vec3) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + u.cross(v) * s + u * (u.dot(v) * (1.0 - c))
}

/// Rotation about the third axis by `g`.
pub fn rotate_k(g: f64, v: &Vec3) -> Vec3 {
    let (s, c) = g.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Pairwise (tree) summation, reproducible independent of thread layout.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn oriented_angle_quadrants() {
        let k = e3();
        assert_abs_diff_eq!(oriented_angle(&k, &e1(), &e2()), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oriented_angle(&k, &e2(), &e1()), 3.0 * PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oriented_angle(&(-k), &e1(), &e2()), 3.0 * PI / 2.0, epsilon = 1e-15);
        // components along the axis are ignored
        let a = Vec3::new(1.0, 0.0, 5.0);
        let b = Vec3::new(-1.0, 0.0, -2.0);
        assert_abs_diff_eq!(oriented_angle(&k, &a, &b), PI, epsilon = 1e-15);
    }

    #[test]
    fn rotation_matches_rotate_k() {
        let v = Vec3::new(0.3, -1.2, 0.7);
        let a = rotate_about(&e3(), 0.9, &v);
        let b = rotate_k(0.9, &v);
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_2pi(-1e-300), 0.0);
        assert_abs_diff_eq!(wrap_2pi(-PI / 2.0), 1.5 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(circ_dist(0.1, TAU - 0.1), 0.2, epsilon = 1e-15);
    }
}
