//! Reduced action-angle chart built on partial angular-momentum sums.
//!
//! With `Cⱼ` the angular momentum of body `j` and `Sⱼ = Σ_{k≥j} Cₖ`
//! (0-based), the chart uses the nodes
//!
//! ```text
//! ν₀ = k × S₀,   νⱼ₊₁ = Pⱼ × Sⱼ₊₁,   nⱼ = Sⱼ × Pⱼ (j < n−1),   nₙ₋₁ = Pₙ₋₁
//! ```
//!
//! and the coordinates
//!
//! ```text
//! χⱼ = |Sⱼ|          Θ₀ = S₀·k          Θⱼ = Sⱼ·Pⱼ₋₁
//! κⱼ = α_{Sⱼ}(νⱼ, nⱼ)   ϑ₀ = α_k(i, ν₀)   ϑⱼ = α_{Pⱼ₋₁}(nⱼ₋₁, νⱼ)
//! ```
//!
//! Pairs are `(Λ, ℓ)`, `(χ, κ)` and `(Θ, ϑ)`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{elements_state, join_blocks, split_blocks, state_elements, Chart, ChartId};
use crate::geometry::{e1, e3, oriented_angle, rotate_about, sin_between, wrap_2pi, Vec3};
use crate::system::CartesianState;
use crate::two_body::{EllipseElements, SystemMasses};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PStarCoords {
    pub lambda: Vec<f64>,
    pub chi: Vec<f64>,
    pub theta: Vec<f64>,
    pub ell: Vec<f64>,
    pub kappa: Vec<f64>,
    pub vartheta: Vec<f64>,
}

/// A single scalar entry of [`PStarCoords`], 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PStarCoord {
    Lambda(usize),
    Chi(usize),
    Theta(usize),
    Ell(usize),
    Kappa(usize),
    Vartheta(usize),
}

impl PStarCoord {
    pub fn is_angle(self) -> bool {
        matches!(self, PStarCoord::Ell(_) | PStarCoord::Kappa(_) | PStarCoord::Vartheta(_))
    }

    /// Every coordinate of an `n`-planet chart, in flat order.
    pub fn all(n: usize) -> Vec<PStarCoord> {
        let ctors: [fn(usize) -> PStarCoord; 6] = [
            PStarCoord::Lambda,
            PStarCoord::Chi,
            PStarCoord::Theta,
            PStarCoord::Ell,
            PStarCoord::Kappa,
            PStarCoord::Vartheta,
        ];
        ctors.iter().flat_map(|c| (0..n).map(c)).collect()
    }
}

impl core::fmt::Display for PStarCoord {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PStarCoord::Lambda(j) => write!(f, "Lambda{}", j),
            PStarCoord::Chi(j) => write!(f, "chi{}", j),
            PStarCoord::Theta(j) => write!(f, "Theta{}", j),
            PStarCoord::Ell(j) => write!(f, "ell{}", j),
            PStarCoord::Kappa(j) => write!(f, "kappa{}", j),
            PStarCoord::Vartheta(j) => write!(f, "vartheta{}", j),
        }
    }
}

impl PStarCoords {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn get(&self, c: PStarCoord) -> f64 {
        match c {
            PStarCoord::Lambda(j) => self.lambda[j],
            PStarCoord::Chi(j) => self.chi[j],
            PStarCoord::Theta(j) => self.theta[j],
            PStarCoord::Ell(j) => self.ell[j],
            PStarCoord::Kappa(j) => self.kappa[j],
            PStarCoord::Vartheta(j) => self.vartheta[j],
        }
    }

    pub fn set(&mut self, c: PStarCoord, v: f64) {
        match c {
            PStarCoord::Lambda(j) => self.lambda[j] = v,
            PStarCoord::Chi(j) => self.chi[j] = v,
            PStarCoord::Theta(j) => self.theta[j] = v,
            PStarCoord::Ell(j) => self.ell[j] = v,
            PStarCoord::Kappa(j) => self.kappa[j] = v,
            PStarCoord::Vartheta(j) => self.vartheta[j] = v,
        }
    }

    pub fn with(&self, c: PStarCoord, v: f64) -> Self {
        let mut out = self.clone();
        out.set(c, v);
        out
    }

    /// Reflection `(Θ, ϑ) → (−Θ, −ϑ)`, all other entries fixed.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.theta {
            *t = -*t;
        }
        for v in &mut out.vartheta {
            *v = wrap_2pi(-*v);
        }
        out
    }
}

/// Angular momenta, partial sums, perihelia and nodes of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularChain {
    pub c: Vec<Vec3>,
    pub s: Vec<Vec3>,
    pub perihelia: Vec<Vec3>,
    /// `ν₀ … νₙ₋₁`
    pub nu: Vec<Vec3>,
    /// `n₀ … nₙ₋₁`
    pub nodes: Vec<Vec3>,
}

impl AngularChain {
    pub fn from_elements(els: &[EllipseElements], masses: &SystemMasses) -> Self {
        let n = els.len();
        let c: Vec<Vec3> = els
            .iter()
            .enumerate()
            .map(|(i, el)| el.angular_momentum(masses, i))
            .collect();
        let perihelia: Vec<Vec3> = els.iter().map(|el| el.perihelion).collect();
        Self::from_parts(c, perihelia, n)
    }

    fn from_parts(c: Vec<Vec3>, perihelia: Vec<Vec3>, n: usize) -> Self {
        let mut s = alloc::vec![Vec3::zeros(); n];
        let mut acc = Vec3::zeros();
        for j in (0..n).rev() {
            acc += c[j];
            s[j] = acc;
        }
        let mut nu = Vec::with_capacity(n);
        let mut nodes = Vec::with_capacity(n);
        nu.push(e3().cross(&s[0]));
        for j in 0..n {
            if j + 1 < n {
                nodes.push(s[j].cross(&perihelia[j]));
                nu.push(perihelia[j].cross(&s[j + 1]));
            } else {
                nodes.push(perihelia[j]);
            }
        }
        Self {
            c,
            s,
            perihelia,
            nu,
            nodes,
        }
    }

    /// Fail if any node is shorter than `sin(node_min)` relative to its factors.
    pub fn check_nodes(&self, node_min: f64) -> Result<()> {
        let floor = node_min.sin();
        let n = self.c.len();
        let check = |name: &str, a: &Vec3, b: &Vec3| {
            let sine = sin_between(a, b);
            if sine < floor {
                Err(Error::VanishingNode {
                    node: name.into(),
                    sine,
                })
            } else {
                Ok(())
            }
        };
        check("nu0 = k x S0", &e3(), &self.s[0])?;
        for j in 0..n.saturating_sub(1) {
            check(&format!("n{j} = S{j} x P{j}"), &self.s[j], &self.perihelia[j])?;
            check(
                &format!("nu{} = P{j} x S{}", j + 1, j + 1),
                &self.perihelia[j],
                &self.s[j + 1],
            )?;
        }
        Ok(())
    }

    /// `|Cⱼ|²` recomputed from `(χ, Θ, ϑ)`, for `1 ≤ j ≤ n−1` (0-based `j−1`).
    pub fn gamma_squared_from_coords(coords: &PStarCoords, j: usize) -> f64 {
        let (chi_prev, chi, th) = (coords.chi[j - 1], coords.chi[j], coords.theta[j]);
        chi_prev * chi_prev + chi * chi - 2.0 * th * th
            + 2.0
                * ((chi * chi - th * th).max(0.0) * (chi_prev * chi_prev - th * th).max(0.0)).sqrt()
                * coords.vartheta[j].cos()
    }
}

#[derive(Debug, Clone)]
pub struct PStarChart {
    pub masses: SystemMasses,
    pub e_min: f64,
    pub node_min: f64,
}

impl PStarChart {
    pub fn new(masses: SystemMasses) -> Self {
        Self {
            masses,
            e_min: super::DEFAULT_E_MIN,
            node_min: super::DEFAULT_NODE_MIN,
        }
    }

    pub fn with_guards(mut self, e_min: f64, node_min: f64) -> Self {
        self.e_min = e_min;
        self.node_min = node_min;
        self
    }

    fn singular(body: usize, reason: &'static str) -> Error {
        Error::ChartSingular {
            chart: "pstar",
            body,
            reason,
        }
    }

    pub fn coords_from_elements(&self, els: &[EllipseElements]) -> Result<PStarCoords> {
        for (i, el) in els.iter().enumerate() {
            if el.e <= self.e_min {
                return Err(Self::singular(i, "eccentricity not above e_min"));
            }
        }
        let chain = AngularChain::from_elements(els, &self.masses);
        chain.check_nodes(self.node_min)?;
        Ok(self.coords_from_chain(&chain, els))
    }

    #[allow(clippy::needless_range_loop)]
    fn coords_from_chain(&self, ch: &AngularChain, els: &[EllipseElements]) -> PStarCoords {
        let n = els.len();
        let mut out = PStarCoords {
            lambda: Vec::with_capacity(n),
            chi: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            ell: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
            vartheta: Vec::with_capacity(n),
        };
        for j in 0..n {
            out.lambda.push(self.masses.lambda_from_axis(j, els[j].a));
            out.ell.push(els[j].mean_anomaly);
            out.chi.push(ch.s[j].norm());
            out.kappa.push(oriented_angle(&ch.s[j], &ch.nu[j], &ch.nodes[j]));
            if j == 0 {
                out.theta.push(ch.s[0].z);
                out.vartheta.push(oriented_angle(&e3(), &e1(), &ch.nu[0]));
            } else {
                let p = &ch.perihelia[j - 1];
                out.theta.push(ch.s[j].dot(p));
                out.vartheta.push(oriented_angle(p, &ch.nodes[j - 1], &ch.nu[j]));
            }
        }
        out
    }

    /// Rebuild the partial sums and perihelia from the actions and angles,
    /// outermost sum first.
    pub fn chain(&self, c: &PStarCoords) -> Result<AngularChain> {
        let n = self.masses.n();
        for v in [&c.lambda, &c.chi, &c.theta, &c.ell, &c.kappa, &c.vartheta] {
            if v.len() != n {
                return Err(Error::Dimension { expected: n, got: v.len() });
            }
        }
        let cone = |chi: f64, th: f64, what: &str| -> Result<f64> {
            let r2 = chi * chi - th * th;
            if !(chi > 0.0) || !(r2 > 0.0) {
                return Err(Error::domain(format!("{what}: need |Θ| < χ, got Θ = {th}, χ = {chi}")));
            }
            Ok(r2.sqrt())
        };
        let k = e3();
        let mut s = Vec::with_capacity(n);
        let mut perihelia = Vec::with_capacity(n);
        let (sv, cv) = c.vartheta[0].sin_cos();
        let mut nu_hat = Vec3::new(cv, sv, 0.0);
        s.push(k * c.theta[0] + nu_hat.cross(&k) * cone(c.chi[0], c.theta[0], "S0")?);
        for j in 0..n {
            let s_hat = s[j] / c.chi[j];
            let node = rotate_about(&s_hat, c.kappa[j], &nu_hat);
            if j + 1 == n {
                perihelia.push(node);
                break;
            }
            let th = c.theta[j + 1];
            let cos_b = th / c.chi[j];
            let sin_b = cone(c.chi[j], th, "P")? / c.chi[j];
            let w = node.cross(&s_hat);
            let p = s_hat * cos_b + w * sin_b;
            nu_hat = rotate_about(&p, c.vartheta[j + 1], &node);
            s.push(p * th + nu_hat.cross(&p) * cone(c.chi[j + 1], th, "S")?);
            perihelia.push(p);
        }
        let cvec: Vec<Vec3> = (0..n)
            .map(|j| if j + 1 < n { s[j] - s[j + 1] } else { s[j] })
            .collect();
        Ok(AngularChain::from_parts(cvec, perihelia, n))
    }

    pub fn elements(&self, c: &PStarCoords) -> Result<Vec<EllipseElements>> {
        let chain = self.chain(c)?;
        chain.check_nodes(self.node_min)?;
        let mut out = Vec::with_capacity(chain.c.len());
        for (j, cj) in chain.c.iter().enumerate() {
            let lam = c.lambda[j];
            let gamma = cj.norm();
            if !(lam > 0.0) || !(gamma > 0.0) || gamma >= lam {
                return Err(Self::singular(j, "need 0 < |C| < Λ"));
            }
            let ratio = gamma / lam;
            let e = (1.0 - ratio * ratio).sqrt();
            if e <= self.e_min {
                return Err(Self::singular(j, "eccentricity not above e_min"));
            }
            let normal = cj / gamma;
            // Remove rounding drift from the perihelion before handing it on.
            let p = chain.perihelia[j];
            let perihelion = (p - normal * normal.dot(&p)).normalize();
            out.push(EllipseElements {
                a: self.masses.axis_from_lambda(j, lam),
                e,
                perihelion,
                normal,
                mean_anomaly: c.ell[j],
            });
        }
        Ok(out)
    }
}

impl Chart for PStarChart {
    type Coords = PStarCoords;

    fn id(&self) -> ChartId {
        ChartId::PStar
    }

    fn n(&self) -> usize {
        self.masses.n()
    }

    fn to_cartesian(&self, c: &PStarCoords) -> Result<CartesianState> {
        elements_state(&self.elements(c)?, &self.masses)
    }

    fn from_cartesian(&self, state: &CartesianState) -> Result<PStarCoords> {
        self.coords_from_elements(&state_elements(state, &self.masses)?)
    }

    fn flatten(&self, c: &PStarCoords) -> Vec<f64> {
        join_blocks([&c.lambda, &c.chi, &c.theta, &c.ell, &c.kappa, &c.vartheta])
    }

    fn unflatten(&self, flat: &[f64]) -> Result<PStarCoords> {
        let [lambda, chi, theta, ell, kappa, vartheta] = split_blocks(flat, self.n())?;
        Ok(PStarCoords {
            lambda,
            chi,
            theta,
            ell,
            kappa,
            vartheta,
        })
    }
}
