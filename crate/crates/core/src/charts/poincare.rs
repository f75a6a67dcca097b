use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{elements_state, join_blocks, split_blocks, state_elements, Chart, ChartId};
use crate::geometry::{e1, e2, e3, wrap_2pi, Vec3};
use crate::system::CartesianState;
use crate::two_body::{EllipseElements, SystemMasses};
use crate::{Error, Result};

/// Rectangular secular variables `z = (η, ξ, p, q)`, each of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularZ {
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl SecularZ {
    pub fn zeros(n: usize) -> Self {
        Self {
            eta: alloc::vec![0.0; n],
            xi: alloc::vec![0.0; n],
            p: alloc::vec![0.0; n],
            q: alloc::vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.eta.len()
    }

    /// Flat layout `(η, ξ, p, q)`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.eta
            .iter()
            .chain(&self.xi)
            .chain(&self.p)
            .chain(&self.q)
            .copied()
            .collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(4) {
            return Err(Error::Dimension {
                expected: 4 * (flat.len() / 4 + 1),
                got: flat.len(),
            });
        }
        let n = flat.len() / 4;
        Ok(Self {
            eta: flat[..n].to_vec(),
            xi: flat[n..2 * n].to_vec(),
            p: flat[2 * n..3 * n].to_vec(),
            q: flat[3 * n..].to_vec(),
        })
    }

    /// Multiply the four blocks by the given signs.
    pub fn with_signs(&self, signs: [f64; 4]) -> Self {
        let f = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect();
        Self {
            eta: f(&self.eta, signs[0]),
            xi: f(&self.xi, signs[1]),
            p: f(&self.p, signs[2]),
            q: f(&self.q, signs[3]),
        }
    }

    /// Apply the planar rotation by `angle` to every `(ηᵢ, ξᵢ)` and `(pᵢ, qᵢ)`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut out = self.clone();
        for i in 0..self.n() {
            out.eta[i] = c * self.eta[i] - s * self.xi[i];
            out.xi[i] = s * self.eta[i] + c * self.xi[i];
            out.p[i] = c * self.p[i] - s * self.q[i];
            out.q[i] = s * self.p[i] + c * self.q[i];
        }
        out
    }
}

/// Poincaré variables. Flat layout `(Λ, η, p, λ, ξ, q)`, pairing
/// `(Λ, λ)`, `(η, ξ)`, `(p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareCoords {
    pub lambda: Vec<f64>,
    pub mean_longitude: Vec<f64>,
    pub z: SecularZ,
}

#[derive(Debug, Clone)]
pub struct PoincareChart {
    pub masses: SystemMasses,
}

/// Reference frame carried by the plane with normal `normal`: the rotation
/// about `k × N` taking `k` to `N`, applied to the first two axes.
fn plane_frame(normal: &Vec3) -> (Vec3, Vec3) {
    let k = e3();
    let u = k.cross(normal);
    let c = normal.z;
    let rot = |v: Vec3| v * c + u.cross(&v) + u * (u.dot(&v) / (1.0 + c));
    (rot(e1()), rot(e2()))
}

impl PoincareChart {
    pub fn new(masses: SystemMasses) -> Self {
        Self { masses }
    }

    fn singular(body: usize, reason: &'static str) -> Error {
        Error::ChartSingular {
            chart: "poincare",
            body,
            reason,
        }
    }

    /// Ellipses for given actions, secular variables and mean longitudes.
    pub fn ellipses(&self, lambda: &[f64], z: &SecularZ, mean_longitude: &[f64]) -> Result<Vec<EllipseElements>> {
        let n = self.masses.n();
        if lambda.len() != n || z.n() != n || mean_longitude.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: lambda.len().min(z.n()).min(mean_longitude.len()),
            });
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let lam = lambda[i];
            if !(lam > 0.0) {
                return Err(Self::singular(i, "Λ must be positive"));
            }
            let (eta, xi, p, q) = (z.eta[i], z.xi[i], z.p[i], z.q[i]);
            let gamma = lam - 0.5 * (eta * eta + xi * xi);
            if !(gamma > 0.0) {
                return Err(Self::singular(i, "eccentricity not below one"));
            }
            let h = gamma - 0.5 * (p * p + q * q);
            let c = h / gamma;
            if !(c > 0.0) {
                return Err(Self::singular(i, "inclination not below π/2"));
            }
            let scale = ((1.0 + c) / (2.0 * gamma)).sqrt();
            let normal = Vec3::new(-q * scale, -p * scale, c).normalize();
            let (f, g) = plane_frame(&normal);
            let ratio = gamma / lam;
            let e = (1.0 - ratio * ratio).max(0.0).sqrt();
            let varpi = if eta == 0.0 && xi == 0.0 { 0.0 } else { (-xi).atan2(eta) };
            let (s, co) = varpi.sin_cos();
            out.push(EllipseElements {
                a: self.masses.axis_from_lambda(i, lam),
                e,
                perihelion: f * co + g * s,
                normal,
                mean_anomaly: wrap_2pi(mean_longitude[i] - varpi),
            });
        }
        Ok(out)
    }

    pub fn coords_from_elements(&self, els: &[EllipseElements]) -> Result<PoincareCoords> {
        let n = els.len();
        let mut out = PoincareCoords {
            lambda: Vec::with_capacity(n),
            mean_longitude: Vec::with_capacity(n),
            z: SecularZ {
                eta: Vec::with_capacity(n),
                xi: Vec::with_capacity(n),
                p: Vec::with_capacity(n),
                q: Vec::with_capacity(n),
            },
        };
        for (i, el) in els.iter().enumerate() {
            let nz = el.normal.z;
            if !(nz > 0.0) {
                return Err(Self::singular(i, "inclination not below π/2"));
            }
            let lam = self.masses.lambda_from_axis(i, el.a);
            let root = (1.0 - el.e * el.e).sqrt();
            let gamma = lam * root;
            let r = (2.0 * lam / (1.0 + root)).sqrt();
            let (f, g) = plane_frame(&el.normal);
            let ecc = el.perihelion * el.e;
            let varpi = el.perihelion.dot(&g).atan2(el.perihelion.dot(&f));
            let s = (2.0 * gamma / (1.0 + nz)).sqrt();
            out.lambda.push(lam);
            out.mean_longitude.push(wrap_2pi(el.mean_anomaly + varpi));
            out.z.eta.push(r * ecc.dot(&f));
            out.z.xi.push(-r * ecc.dot(&g));
            out.z.p.push(-s * el.normal.y);
            out.z.q.push(-s * el.normal.x);
        }
        Ok(out)
    }
}

impl Chart for PoincareChart {
    type Coords = PoincareCoords;

    fn id(&self) -> ChartId {
        ChartId::Poincare
    }

    fn n(&self) -> usize {
        self.masses.n()
    }

    fn to_cartesian(&self, c: &PoincareCoords) -> Result<CartesianState> {
        elements_state(&self.ellipses(&c.lambda, &c.z, &c.mean_longitude)?, &self.masses)
    }

    fn from_cartesian(&self, state: &CartesianState) -> Result<PoincareCoords> {
        self.coords_from_elements(&state_elements(state, &self.masses)?)
    }

    fn flatten(&self, c: &PoincareCoords) -> Vec<f64> {
        join_blocks([&c.lambda, &c.z.eta, &c.z.p, &c.mean_longitude, &c.z.xi, &c.z.q])
    }

    fn unflatten(&self, flat: &[f64]) -> Result<PoincareCoords> {
        let [lambda, eta, p, mean_longitude, xi, q] = split_blocks(flat, self.n())?;
        Ok(PoincareCoords {
            lambda,
            mean_longitude,
            z: SecularZ { eta, xi, p, q },
        })
    }

    fn angle_mask(&self) -> Vec<bool> {
        let n = self.n();
        (0..6 * n).map(|k| (3 * n..4 * n).contains(&k)).collect()
    }
}
