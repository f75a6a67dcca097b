use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{elements_state, join_blocks, split_blocks, state_elements, Chart, ChartId};
use crate::geometry::{e1, e3, oriented_angle, rotate_about, rotate_k, sin_between, wrap_2pi};
use crate::system::CartesianState;
use crate::two_body::{EllipseElements, SystemMasses};
use crate::{Error, Result};

/// Delaunay action-angle variables `(Λ, Γ, H, ℓ, g, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayCoords {
    pub lambda: Vec<f64>,
    /// `|xᵢ × yᵢ|`
    pub gamma: Vec<f64>,
    /// Third component of `xᵢ × yᵢ`.
    pub h_action: Vec<f64>,
    pub ell: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DelaunayChart {
    pub masses: SystemMasses,
    pub e_min: f64,
    pub inclination_min: f64,
}

impl DelaunayChart {
    pub fn new(masses: SystemMasses) -> Self {
        Self {
            masses,
            e_min: super::DEFAULT_E_MIN,
            inclination_min: super::DEFAULT_INCLINATION_MIN,
        }
    }

    fn singular(body: usize, reason: &'static str) -> Error {
        Error::ChartSingular {
            chart: "delaunay",
            body,
            reason,
        }
    }

    pub fn elements(&self, c: &DelaunayCoords) -> Result<Vec<EllipseElements>> {
        let n = self.masses.n();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (lam, gam, hh) = (c.lambda[i], c.gamma[i], c.h_action[i]);
            if !(lam > 0.0) || !(gam > 0.0) || gam > lam || hh.abs() > gam {
                return Err(Self::singular(i, "actions violate Λ ≥ Γ ≥ |H|, Λ > 0"));
            }
            let ratio = gam / lam;
            let e = (1.0 - ratio * ratio).max(0.0).sqrt();
            let cos_i = hh / gam;
            let sin_i = (1.0 - cos_i * cos_i).max(0.0).sqrt();
            if e < self.e_min {
                return Err(Self::singular(i, "eccentricity below e_min"));
            }
            if sin_i < self.inclination_min.sin() {
                return Err(Self::singular(i, "inclination too close to 0 or π"));
            }
            let node = rotate_k(c.h[i], &e1());
            let normal = e3() * cos_i + node.cross(&e3()) * sin_i;
            let perihelion = rotate_about(&normal, c.g[i], &node);
            out.push(EllipseElements {
                a: self.masses.axis_from_lambda(i, lam),
                e,
                perihelion,
                normal,
                mean_anomaly: c.ell[i],
            });
        }
        Ok(out)
    }
}

impl Chart for DelaunayChart {
    type Coords = DelaunayCoords;

    fn id(&self) -> ChartId {
        ChartId::Delaunay
    }

    fn n(&self) -> usize {
        self.masses.n()
    }

    fn to_cartesian(&self, c: &DelaunayCoords) -> Result<CartesianState> {
        elements_state(&self.elements(c)?, &self.masses)
    }

    fn from_cartesian(&self, state: &CartesianState) -> Result<DelaunayCoords> {
        let els = state_elements(state, &self.masses)?;
        let n = els.len();
        let mut c = DelaunayCoords {
            lambda: Vec::with_capacity(n),
            gamma: Vec::with_capacity(n),
            h_action: Vec::with_capacity(n),
            ell: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            h: Vec::with_capacity(n),
        };
        for (i, el) in els.iter().enumerate() {
            if el.e < self.e_min {
                return Err(Self::singular(i, "eccentricity below e_min"));
            }
            if sin_between(&e3(), &el.normal) < self.inclination_min.sin() {
                return Err(Self::singular(i, "inclination too close to 0 or π"));
            }
            let lam = self.masses.lambda_from_axis(i, el.a);
            let ang = el.angular_momentum(&self.masses, i);
            let node = e3().cross(&el.normal);
            c.lambda.push(lam);
            c.gamma.push(ang.norm());
            c.h_action.push(ang.z);
            c.ell.push(el.mean_anomaly);
            c.g.push(oriented_angle(&el.normal, &node, &el.perihelion));
            c.h.push(wrap_2pi(node.y.atan2(node.x)));
        }
        Ok(c)
    }

    fn flatten(&self, c: &DelaunayCoords) -> Vec<f64> {
        join_blocks([&c.lambda, &c.gamma, &c.h_action, &c.ell, &c.g, &c.h])
    }

    fn unflatten(&self, flat: &[f64]) -> Result<DelaunayCoords> {
        let [lambda, gamma, h_action, ell, g, h] = split_blocks(flat, self.n())?;
        Ok(DelaunayCoords {
            lambda,
            gamma,
            h_action,
            ell,
            g,
            h,
        })
    }
}
