//! Heliocentric Hamiltonian of the planetary problem.
//!
//! `H = Σ (|yᵢ|²/(2𝔪ᵢ) − 𝔪ᵢ𝔐ᵢ/|xᵢ|) + μ Σ_{i<j} (yᵢ·yⱼ/m₀ − mᵢmⱼ/|xᵢ − xⱼ|)`

use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::two_body::SystemMasses;
use crate::{Error, Result};

/// Heliocentric momenta and positions of `n` planets.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianState {
    pub y: Vec<Vec3>,
    pub x: Vec<Vec3>,
}

impl CartesianState {
    pub fn new(y: Vec<Vec3>, x: Vec<Vec3>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: y.len(),
            });
        }
        Ok(Self { y, x })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Flat layout `(y¹, …, yⁿ, x¹, …, xⁿ)`, momenta first.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(6 * self.n());
        for v in self.y.iter().chain(self.x.iter()) {
            out.extend_from_slice(v.as_slice());
        }
        out
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(6) {
            return Err(Error::Dimension {
                expected: 6 * (flat.len() / 6 + 1),
                got: flat.len(),
            });
        }
        let n = flat.len() / 6;
        let vec = |k: usize| Vec3::new(flat[3 * k], flat[3 * k + 1], flat[3 * k + 2]);
        Ok(Self {
            y: (0..n).map(vec).collect(),
            x: (n..2 * n).map(vec).collect(),
        })
    }

    /// Apply the same linear map to every momentum and position.
    pub fn map(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self {
            y: self.y.iter().map(&f).collect(),
            x: self.x.iter().map(&f).collect(),
        }
    }

    /// Apply sign patterns `r` to momenta and `r'` to positions.
    pub fn reflect(&self, r: [f64; 3], r_prime: [f64; 3]) -> Self {
        let s = |v: &Vec3, t: [f64; 3]| Vec3::new(v.x * t[0], v.y * t[1], v.z * t[2]);
        Self {
            y: self.y.iter().map(|v| s(v, r)).collect(),
            x: self.x.iter().map(|v| s(v, r_prime)).collect(),
        }
    }

    /// Per-planet angular momenta `xᵢ × yᵢ`.
    pub fn angular_momenta(&self) -> Vec<Vec3> {
        self.x.iter().zip(&self.y).map(|(x, y)| x.cross(y)).collect()
    }

    /// Total angular momentum `Σ xᵢ × yᵢ`.
    pub fn total_angular_momentum(&self) -> Vec3 {
        self.angular_momenta().iter().sum()
    }

    /// Largest relative difference between two states, by block norm.
    pub fn max_relative_difference(&self, other: &Self) -> f64 {
        let scale_y = self.y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let scale_x = self.x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let dy = self.y.iter().zip(&other.y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let dx = self.x.iter().zip(&other.x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        (dy / scale_y).max(dx / scale_x)
    }
}

/// Energy split of the heliocentric Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianValue {
    pub total: f64,
    pub keplerian: f64,
    /// Newtonian pair part `−Σ mᵢmⱼ/|xᵢ − xⱼ|` (without the factor μ).
    pub direct: f64,
    /// Momentum coupling `Σ yᵢ·yⱼ/m₀` (without the factor μ).
    pub indirect: f64,
}

/// Masses plus the collision guard used by every evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanetarySystem {
    pub masses: SystemMasses,
    /// Minimum admissible distance between any two bodies.
    pub collision_radius: f64,
}

/// Default guard, in units of the innermost semi-major axis.
pub const DEFAULT_COLLISION_RADIUS: f64 = 1e-8;

impl PlanetarySystem {
    pub fn new(masses: SystemMasses) -> Self {
        Self {
            masses,
            collision_radius: DEFAULT_COLLISION_RADIUS,
        }
    }

    pub fn with_collision_radius(mut self, r: f64) -> Self {
        self.collision_radius = r;
        self
    }

    pub fn n(&self) -> usize {
        self.masses.n()
    }

    fn check_dims(&self, state: &CartesianState) -> Result<()> {
        if state.n() != self.n() || state.y.len() != state.x.len() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: state.n(),
            });
        }
        Ok(())
    }

    /// Fails with [`Error::Collision`] if two bodies (or a planet and the
    /// sun) are closer than the guard.
    pub fn check_collisions(&self, state: &CartesianState) -> Result<()> {
        let guard = self.collision_radius;
        for (i, xi) in state.x.iter().enumerate() {
            let r = xi.norm();
            if !(r >= guard) {
                return Err(Error::Collision {
                    a: i,
                    b: None,
                    distance: r,
                    guard,
                });
            }
            for (j, xj) in state.x.iter().enumerate().skip(i + 1) {
                let d = (xi - xj).norm();
                if !(d >= guard) {
                    return Err(Error::Collision {
                        a: i,
                        b: Some(j),
                        distance: d,
                        guard,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, state: &CartesianState) -> Result<HamiltonianValue> {
        self.check_dims(state)?;
        self.check_collisions(state)?;
        let m = &self.masses;
        let n = self.n();
        let mut keplerian = 0.0;
        for i in 0..n {
            keplerian += crate::two_body::two_body_energy(&state.y[i], &state.x[i], m, i);
        }
        let mut direct = 0.0;
        let mut indirect = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                indirect += state.y[i].dot(&state.y[j]) / m.m0();
                direct -= m.planet(i) * m.planet(j) / (state.x[i] - state.x[j]).norm();
            }
        }
        Ok(HamiltonianValue {
            total: keplerian + m.mu() * (direct + indirect),
            keplerian,
            direct,
            indirect,
        })
    }

    /// `(∂H/∂y, ∂H/∂x)`.
    pub fn gradient(&self, state: &CartesianState) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
        self.check_dims(state)?;
        self.check_collisions(state)?;
        Ok(self.gradient_unchecked(state))
    }

    pub(crate) fn gradient_unchecked(&self, state: &CartesianState) -> (Vec<Vec3>, Vec<Vec3>) {
        let m = &self.masses;
        let n = self.n();
        let mu = m.mu();
        let y_sum: Vec3 = state.y.iter().sum();
        let mut dy = Vec::with_capacity(n);
        let mut dx = Vec::with_capacity(n);
        for i in 0..n {
            let red = m.reduced(i);
            let yi = &state.y[i];
            dy.push(yi / red + (y_sum - yi) * (mu / m.m0()));
            let xi = &state.x[i];
            let r = xi.norm();
            dx.push(xi * (red * m.central(i) / (r * r * r)));
        }
        if mu != 0.0 {
            for i in 0..n {
                for j in i + 1..n {
                    let d = state.x[i] - state.x[j];
                    let r = d.norm();
                    let f = d * (mu * m.planet(i) * m.planet(j) / (r * r * r));
                    dx[i] += f;
                    dx[j] -= f;
                }
            }
        }
        (dy, dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{e1, e2, e3, rotate_about};
    use crate::two_body::{elements_to_cartesian, EllipseElements};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use core::f64::consts::TAU;

    fn random_state(rng: &mut ChaCha8Rng, masses: &SystemMasses) -> CartesianState {
        let n = masses.n();
        let mut y = Vec::new();
        let mut x = Vec::new();
        for i in 0..n {
            let axis = Vec3::new(rng.random(), rng.random(), rng.random()).normalize();
            let normal = rotate_about(&axis, rng.random_range(0.0..3.0), &e3());
            let p = normal.cross(&axis).normalize();
            let el = EllipseElements {
                a: 1.0 * 3.0f64.powi(i as i32),
                e: rng.random_range(0.0..0.4),
                perihelion: p,
                normal,
                mean_anomaly: rng.random_range(0.0..TAU),
            };
            let (yi, xi) = elements_to_cartesian(&el, masses, i).unwrap();
            y.push(yi);
            x.push(xi);
        }
        CartesianState { y, x }
    }

    fn naive_total(state: &CartesianState, m: &SystemMasses) -> f64 {
        // term by term, in a different order
        let mut h = 0.0;
        for j in (0..state.n()).rev() {
            for i in 0..j {
                h += m.mu() * state.y[i].dot(&state.y[j]) / m.m0();
                h += -m.mu() * m.planet(i) * m.planet(j) / (state.x[j] - state.x[i]).norm();
            }
            let red = m.m0() * m.planet(j) / (m.m0() + m.mu() * m.planet(j));
            let big = m.m0() + m.mu() * m.planet(j);
            h += state.y[j].norm_squared() / (2.0 * red) - red * big / state.x[j].norm();
        }
        h
    }

    #[test]
    fn single_planet_has_no_pair_terms() {
        let sys = PlanetarySystem::new(SystemMasses::uniform(1, 0.1));
        let state = CartesianState::new(alloc::vec![e2()], alloc::vec![e1()]).unwrap();
        let h = sys.evaluate(&state).unwrap();
        assert_eq!(h.direct, 0.0);
        assert_eq!(h.indirect, 0.0);
        assert_eq!(h.total, h.keplerian);
    }

    #[test]
    fn zero_mu_is_keplerian() {
        let masses = SystemMasses::new(1.0, 0.0, alloc::vec![1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = random_state(&mut rng, &masses);
        let h = PlanetarySystem::new(masses).evaluate(&state).unwrap();
        assert_eq!(h.total, h.keplerian);
    }

    #[test]
    fn matches_naive_summation() {
        let masses = SystemMasses::new(1.0, 1e-2, alloc::vec![1.0, 0.5, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = PlanetarySystem::new(masses.clone());
        for _ in 0..20 {
            let state = random_state(&mut rng, &masses);
            let h = sys.evaluate(&state).unwrap();
            assert_relative_eq!(h.total, naive_total(&state, &masses), max_relative = 1e-13);
            assert_relative_eq!(h.total, h.keplerian + 1e-2 * (h.direct + h.indirect), max_relative = 1e-15);
        }
    }

    #[test]
    fn kepler_force_at_zero_mu() {
        let masses = SystemMasses::uniform(1, 0.0);
        let sys = PlanetarySystem::new(masses);
        let x = Vec3::new(0.6, 0.8, 0.0);
        let state = CartesianState::new(alloc::vec![Vec3::new(-0.8, 0.6, 0.0)], alloc::vec![x]).unwrap();
        let (_, dx) = sys.gradient(&state).unwrap();
        assert_relative_eq!(dx[0], x, epsilon = 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let masses = SystemMasses::new(1.0, 0.05, alloc::vec![1.0, 3.0, 0.7]).unwrap();
        let sys = PlanetarySystem::new(masses.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let state = random_state(&mut rng, &masses);
            let (dy, dx) = sys.gradient(&state).unwrap();
            let analytic: Vec<f64> = dy.iter().chain(dx.iter()).flat_map(|v| [v.x, v.y, v.z]).collect();
            let flat = state.to_flat();
            for k in 0..flat.len() {
                let h = 1e-6 * flat[k].abs().max(1.0);
                let mut p = flat.clone();
                let mut q = flat.clone();
                p[k] += h;
                q[k] -= h;
                let hp = sys.evaluate(&CartesianState::from_flat(&p).unwrap()).unwrap().total;
                let hq = sys.evaluate(&CartesianState::from_flat(&q).unwrap()).unwrap().total;
                let fd = (hp - hq) / (2.0 * h);
                let scale = analytic[k].abs().max(1e-3);
                assert!((fd - analytic[k]).abs() / scale < 1e-6, "component {k}: {fd} vs {}", analytic[k]);
            }
        }
    }

    #[test]
    fn euler_relation_for_homogeneous_parts() {
        // kinetic parts are degree 2 in y, potentials degree −1 in x
        let masses = SystemMasses::new(1.0, 0.1, alloc::vec![1.0, 2.0]).unwrap();
        let sys = PlanetarySystem::new(masses.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = random_state(&mut rng, &masses);
        let (dy, dx) = sys.gradient(&state).unwrap();
        let y_dot: f64 = dy.iter().zip(&state.y).map(|(g, y)| g.dot(y)).sum();
        let x_dot: f64 = dx.iter().zip(&state.x).map(|(g, x)| g.dot(x)).sum();
        let h = sys.evaluate(&state).unwrap();
        let kinetic: f64 = (0..2)
            .map(|i| state.y[i].norm_squared() / (2.0 * masses.reduced(i)))
            .sum::<f64>()
            + 0.1 * h.indirect;
        let potential = h.total - kinetic;
        assert_relative_eq!(y_dot, 2.0 * kinetic, max_relative = 1e-13);
        assert_relative_eq!(x_dot, -potential, max_relative = 1e-13);
    }

    #[test]
    fn rotation_and_reflection_invariance() {
        let masses = SystemMasses::new(1.0, 0.1, alloc::vec![1.0, 2.0, 0.5]).unwrap();
        let sys = PlanetarySystem::new(masses.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = random_state(&mut rng, &masses);
        let h0 = sys.evaluate(&state).unwrap().total;
        for _ in 0..100 {
            let axis = Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                .normalize();
            let angle = rng.random_range(0.0..TAU);
            let rotated = state.map(|v| rotate_about(&axis, angle, v));
            let h = sys.evaluate(&rotated).unwrap().total;
            assert_relative_eq!(h, h0, max_relative = 1e-12);
        }
        let patterns: [([f64; 3], [f64; 3]); 4] = [
            ([1.0, -1.0, -1.0], [-1.0, 1.0, 1.0]),
            ([-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]),
            ([1.0, 1.0, -1.0], [1.0, 1.0, -1.0]),
            ([1.0, -1.0, 1.0], [1.0, -1.0, 1.0]),
        ];
        for (r, rp) in patterns {
            let h = sys.evaluate(&state.reflect(r, rp)).unwrap().total;
            assert_relative_eq!(h, h0, max_relative = 1e-12);
        }
    }

    #[test]
    fn collision_is_reported() {
        let sys = PlanetarySystem::new(SystemMasses::uniform(2, 0.1));
        let state = CartesianState::new(alloc::vec![e2(), e2()], alloc::vec![e1(), e1()]).unwrap();
        assert!(matches!(
            sys.evaluate(&state),
            Err(Error::Collision { a: 0, b: Some(1), .. })
        ));
    }
}
