//! Two-body (Keplerian) machinery.
//!
//! Each planet `i` moves, at `μ = 0`, on a Kepler ellipse of the reduced
//! problem `|y|²/(2𝔪ᵢ) − 𝔪ᵢ𝔐ᵢ/|x|` with
//! `𝔪ᵢ = m₀mᵢ/(m₀ + μmᵢ)` and `𝔐ᵢ = m₀ + μmᵢ`.
//! The Delaunay action is `Λᵢ = 𝔪ᵢ √(𝔐ᵢ aᵢ)`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::geometry::{e1, e3, wrap_2pi, Vec3};
use crate::{Error, Result};

/// Sun mass, perturbation scale and planet mass factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMasses {
    m0: f64,
    mu: f64,
    m: Vec<f64>,
}

impl SystemMasses {
    pub fn new(m0: f64, mu: f64, m: Vec<f64>) -> Result<Self> {
        if !(m0 > 0.0) || !m0.is_finite() {
            return Err(Error::Masses("m0 must be positive"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::Masses("mu must be non-negative"));
        }
        if m.is_empty() {
            return Err(Error::Masses("at least one planet is required"));
        }
        if m.iter().any(|&mi| !(mi > 0.0) || !mi.is_finite()) {
            return Err(Error::Masses("planet mass factors must be positive"));
        }
        Ok(Self { m0, mu, m })
    }

    /// Unit sun mass and `n` planets of unit mass factor.
    pub fn uniform(n: usize, mu: f64) -> Self {
        Self::new(1.0, mu, alloc::vec![1.0; n]).expect("uniform masses are valid")
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn planet(&self, i: usize) -> f64 {
        self.m[i]
    }

    pub fn planets(&self) -> &[f64] {
        &self.m
    }

    /// Reduced mass 𝔪ᵢ.
    pub fn reduced(&self, i: usize) -> f64 {
        self.m0 * self.m[i] / (self.m0 + self.mu * self.m[i])
    }

    /// Reduced central mass 𝔐ᵢ.
    pub fn central(&self, i: usize) -> f64 {
        self.m0 + self.mu * self.m[i]
    }

    pub fn lambda_from_axis(&self, i: usize, a: f64) -> f64 {
        self.reduced(i) * (self.central(i) * a).sqrt()
    }

    pub fn axis_from_lambda(&self, i: usize, lambda: f64) -> f64 {
        let r = lambda / self.reduced(i);
        r * r / self.central(i)
    }

    /// Mean motion `√(𝔐ᵢ/a³)`.
    pub fn mean_motion(&self, i: usize, a: f64) -> f64 {
        (self.central(i) / (a * a * a)).sqrt()
    }
}

/// Osculating ellipse of one body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseElements {
    pub a: f64,
    pub e: f64,
    /// Unit vector from the focus to the perihelion.
    pub perihelion: Vec3,
    /// Unit normal of the orbital plane, oriented along the angular momentum.
    pub normal: Vec3,
    pub mean_anomaly: f64,
}

impl EllipseElements {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::domain("semi-major axis must be positive"));
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(Error::Eccentricity(self.e));
        }
        let tol = 1e-10;
        if (self.perihelion.norm() - 1.0).abs() > tol
            || (self.normal.norm() - 1.0).abs() > tol
            || self.perihelion.dot(&self.normal).abs() > tol
        {
            return Err(Error::domain("perihelion and normal must be orthonormal"));
        }
        Ok(())
    }

    /// Second in-plane axis `N × P`.
    pub fn q_axis(&self) -> Vec3 {
        self.normal.cross(&self.perihelion)
    }

    /// Area of the ellipse, `π a² √(1 − e²)`.
    pub fn area(&self) -> f64 {
        PI * self.a * self.a * (1.0 - self.e * self.e).sqrt()
    }

    /// Angular momentum vector `x × y` for the body owning these elements.
    pub fn angular_momentum(&self, masses: &SystemMasses, body: usize) -> Vec3 {
        self.normal * (masses.lambda_from_axis(body, self.a) * (1.0 - self.e * self.e).sqrt())
    }

    pub fn with_mean_anomaly(mut self, ell: f64) -> Self {
        self.mean_anomaly = ell;
        self
    }

    /// Position and `∂x/∂ℓ` at mean anomaly `ell`.
    pub fn position_and_tangent(&self, ell: f64) -> (Vec3, Vec3) {
        let big_e = solve_kepler(ell, self.e).expect("validated eccentricity");
        let (s, c) = big_e.sin_cos();
        let b = self.a * (1.0 - self.e * self.e).sqrt();
        let q = self.q_axis();
        let x = self.perihelion * (self.a * (c - self.e)) + q * (b * s);
        let den = 1.0 - self.e * c;
        let dx = (self.perihelion * (-self.a * s) + q * (b * c)) / den;
        (x, dx)
    }
}

const KEPLER_MAX_NEWTON: usize = 50;

/// Solve `E − e sin E = ℓ` for the eccentric anomaly, returned in `[0, 2π)`.
pub fn solve_kepler(ell: f64, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Eccentricity(e));
    }
    if !ell.is_finite() {
        return Err(Error::domain("mean anomaly must be finite"));
    }
    let m = wrap_2pi(ell);
    if e == 0.0 {
        return Ok(m);
    }
    // Work on (-π, π] where the seed is good and the residual is symmetric.
    let m = if m > PI { m - TAU } else { m };
    let f = |x: f64| x - e * x.sin() - m;

    let mut big_e = m + e * m.sin();
    let mut converged = false;
    for _ in 0..KEPLER_MAX_NEWTON {
        let (s, c) = big_e.sin_cos();
        let step = (big_e - e * s - m) / (1.0 - e * c);
        big_e -= step;
        if step.abs() <= 4.0 * f64::EPSILON * big_e.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged || !big_e.is_finite() || f(big_e).abs() > 1e-14 {
        // f is increasing and changes sign on [m - e, m + e].
        let (mut lo, mut hi) = (m - e, m + e);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        big_e = 0.5 * (lo + hi);
    }
    Ok(wrap_2pi(big_e))
}

/// Kepler map of one body: elements to heliocentric `(y, x)`.
///
/// The momentum is `y = 𝔪 √(𝔐/a³) ∂ℓ x`.
pub fn elements_to_cartesian(
    el: &EllipseElements,
    masses: &SystemMasses,
    body: usize,
) -> Result<(Vec3, Vec3)> {
    el.validate()?;
    let (x, dx) = el.position_and_tangent(el.mean_anomaly);
    let y = dx * (masses.reduced(body) * masses.mean_motion(body, el.a));
    Ok((y, x))
}

/// Inverse Kepler map.
///
/// For a circular orbit the perihelion is undefined; it is then taken along
/// the ascending node `k × N` (or the first axis for an equatorial orbit) and
/// the mean anomaly is measured from there.
pub fn cartesian_to_elements(
    y: &Vec3,
    x: &Vec3,
    masses: &SystemMasses,
    body: usize,
) -> Result<EllipseElements> {
    let red = masses.reduced(body);
    let big_m = masses.central(body);
    let r = x.norm();
    let v = y / red;
    let c = x.cross(&v);
    if r == 0.0 || c.norm() <= 1e-14 * r * v.norm() {
        return Err(Error::Unbound { body });
    }
    let energy = 0.5 * v.norm_squared() - big_m / r;
    if !(energy < 0.0) {
        return Err(Error::Unbound { body });
    }
    let a = -big_m / (2.0 * energy);
    let normal = c.normalize();
    let e_vec = v.cross(&c) / big_m - x / r;
    let mut e = e_vec.norm();
    let perihelion = if e > 1e-14 {
        e_vec / e
    } else {
        e = 0.0;
        let node = e3().cross(&normal);
        if node.norm() > 1e-12 {
            node.normalize()
        } else {
            (e1() - normal * normal.x).normalize()
        }
    };
    if e >= 1.0 {
        return Err(Error::Unbound { body });
    }
    let q = normal.cross(&perihelion);
    let b = a * (1.0 - e * e).sqrt();
    let cos_e = x.dot(&perihelion) / a + e;
    let sin_e = x.dot(&q) / b;
    let big_e = sin_e.atan2(cos_e);
    let ell = wrap_2pi(big_e - e * big_e.sin());
    Ok(EllipseElements {
        a,
        e,
        perihelion,
        normal,
        mean_anomaly: ell,
    })
}

/// `h_K(Λ) = −Σ 𝔪ᵢ³𝔐ᵢ²/(2Λᵢ²)`.
pub fn keplerian_energy(lambda: &[f64], masses: &SystemMasses) -> f64 {
    lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let red = masses.reduced(i);
            let big_m = masses.central(i);
            -red * red * red * big_m * big_m / (2.0 * l * l)
        })
        .sum()
}

/// Two-body energy `|y|²/(2𝔪) − 𝔪𝔐/|x|` of one body.
pub fn two_body_energy(y: &Vec3, x: &Vec3, masses: &SystemMasses, body: usize) -> f64 {
    let red = masses.reduced(body);
    y.norm_squared() / (2.0 * red) - red * masses.central(body) / x.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn kepler_residual(ell: f64, e: f64) -> f64 {
        let big_e = solve_kepler(ell, e).unwrap();
        let r = big_e - e * big_e.sin() - wrap_2pi(ell);
        crate::geometry::wrap_pi(r).abs()
    }

    #[test]
    fn kepler_fixed_points() {
        assert_eq!(solve_kepler(0.0, 0.5).unwrap(), 0.0);
        assert_relative_eq!(solve_kepler(PI, 0.3).unwrap(), PI, epsilon = 1e-15);
    }

    #[test]
    fn kepler_matches_bisection() {
        // independent bisection on [0, 2π)
        let (ell, e) = (1.0, 0.8);
        let f = |x: f64| x - e * x.sin() - ell;
        let (mut lo, mut hi) = (0.0_f64, TAU);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        let expected = 0.5 * (lo + hi);
        assert!((solve_kepler(ell, e).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 1.782_191_328_9).abs() < 1e-9);
    }

    #[test]
    fn kepler_rejects_bad_eccentricity() {
        assert_eq!(solve_kepler(1.0, 1.0), Err(Error::Eccentricity(1.0)));
        assert!(solve_kepler(1.0, -0.1).is_err());
    }

    #[test]
    fn kepler_residual_grid() {
        let mut worst: f64 = 0.0;
        for i in 0..400 {
            for j in 0..=99 {
                let ell = TAU * i as f64 / 400.0;
                let e = 0.99 * j as f64 / 99.0;
                worst = worst.max(kepler_residual(ell, e));
            }
        }
        assert!(worst < 1e-13, "worst residual {worst:e}");
    }

    fn frame(inc: f64, node: f64, argp: f64) -> (Vec3, Vec3) {
        use crate::geometry::{rotate_about, rotate_k};
        let nu = rotate_k(node, &e1());
        let normal = rotate_about(&nu, inc, &e3());
        let perihelion = rotate_about(&normal, argp, &nu);
        (perihelion, normal)
    }

    #[test]
    fn circular_orbit_at_perihelion() {
        let masses = SystemMasses::uniform(1, 0.0);
        let el = EllipseElements {
            a: 1.0,
            e: 0.0,
            perihelion: e1(),
            normal: e3(),
            mean_anomaly: 0.0,
        };
        let (y, x) = elements_to_cartesian(&el, &masses, 0).unwrap();
        assert_relative_eq!(x, e1(), epsilon = 1e-15);
        assert_relative_eq!(y, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
        let back = cartesian_to_elements(&y, &x, &masses, 0).unwrap();
        assert!(back.e < 1e-14);
        assert_relative_eq!(back.a, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn energy_matches_keplerian_energy() {
        let masses = SystemMasses::new(1.0, 0.01, alloc::vec![2.0]).unwrap();
        let (p, n) = frame(0.4, 1.0, 2.0);
        let el = EllipseElements {
            a: 2.5,
            e: 0.6,
            perihelion: p,
            normal: n,
            mean_anomaly: 0.7,
        };
        let (y, x) = elements_to_cartesian(&el, &masses, 0).unwrap();
        let lam = masses.lambda_from_axis(0, 2.5);
        assert_relative_eq!(
            two_body_energy(&y, &x, &masses, 0),
            keplerian_energy(&[lam], &masses),
            max_relative = 1e-12
        );
        // |C| = Λ √(1 − e²)
        assert_relative_eq!(
            x.cross(&y).norm(),
            lam * (1.0_f64 - 0.36).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn keplerian_energy_scaling() {
        let masses = SystemMasses::uniform(1, 0.0);
        assert_eq!(keplerian_energy(&[1.0], &masses), -0.5);
        assert_relative_eq!(keplerian_energy(&[2.0], &masses), -0.125, epsilon = 1e-16);
    }

    #[test]
    fn unbound_orbit_is_rejected() {
        let masses = SystemMasses::uniform(1, 0.0);
        let x = e1();
        let y = Vec3::new(0.0, 1.5, 0.0);
        assert_eq!(
            cartesian_to_elements(&y, &x, &masses, 0),
            Err(Error::Unbound { body: 0 })
        );
        let radial = Vec3::new(0.3, 0.0, 0.0);
        assert!(cartesian_to_elements(&radial, &x, &masses, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip(
            a in 0.2f64..20.0,
            e in 0.0f64..0.95,
            inc in 0.0f64..PI,
            node in 0.0f64..TAU,
            argp in 0.0f64..TAU,
            ell in 0.0f64..TAU,
            mass in 0.1f64..5.0,
        ) {
            let masses = SystemMasses::new(1.0, 1e-3, alloc::vec![mass]).unwrap();
            let (p, n) = frame(inc, node, argp);
            let el = EllipseElements { a, e, perihelion: p, normal: n, mean_anomaly: ell };
            let (y, x) = elements_to_cartesian(&el, &masses, 0).unwrap();
            let back = cartesian_to_elements(&y, &x, &masses, 0).unwrap();
            let (y2, x2) = elements_to_cartesian(&back, &masses, 0).unwrap();
            prop_assert!((x2 - x).norm() <= 1e-11 * x.norm());
            prop_assert!((y2 - y).norm() <= 1e-11 * y.norm());
            prop_assert!((back.a - a).abs() <= 1e-11 * a);
            // x × y reproduces the element-level angular momentum
            let c = el.angular_momentum(&masses, 0);
            prop_assert!((x.cross(&y) - c).norm() <= 1e-12 * c.norm());
            prop_assert!(kepler_residual(ell, e) < 1e-13);
        }
    }
}
