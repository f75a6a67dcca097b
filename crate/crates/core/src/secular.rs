//! Averages of the perturbation over the mean anomalies.
//!
//! All averages use the periodic trapezoidal rule on the nodes
//! `ℓ = 2πk/N`, doubling `N` until two successive estimates agree to the
//! requested tolerance. Sums are pairwise, so results do not depend on how
//! callers split work.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::charts::{PStarChart, PStarCoord, PStarCoords, PoincareChart, SecularZ};
use crate::geometry::{pairwise_sum, Vec3};
use crate::system::DEFAULT_COLLISION_RADIUS;
use crate::two_body::{EllipseElements, SystemMasses};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_START_NODES: usize = 32;
pub const DEFAULT_MAX_NODES: usize = 1024;
pub const MAX_LEGENDRE_ORDER: u8 = 4;
/// Order terms require `aᵢ/aⱼ` below this.
pub const MAX_AXIS_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Starting nodes per angle.
    pub nodes: usize,
    pub tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_START_NODES,
            tol: DEFAULT_TOL,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize, tol: f64, max_nodes: usize) -> Result<Self> {
        if nodes < 8 || max_nodes < nodes {
            return Err(Error::domain("quadrature needs 8 ≤ nodes ≤ max_nodes"));
        }
        if !(tol > 0.0) {
            return Err(Error::domain("quadrature tolerance must be positive"));
        }
        Ok(Self { nodes, tol, max_nodes })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Run `eval(N)` on doubling node counts until successive values agree.
    pub fn converge(&self, mut eval: impl FnMut(usize) -> Result<f64>) -> Result<Quadrature> {
        let mut n = self.nodes;
        let mut prev = eval(n)?;
        loop {
            if 2 * n > self.max_nodes {
                return Err(Error::Quadrature {
                    estimate: prev,
                    change: f64::NAN,
                    nodes: n,
                });
            }
            n *= 2;
            let next = eval(n)?;
            let change = (next - prev).abs();
            if change < self.tol {
                return Ok(Quadrature {
                    value: next,
                    nodes: n,
                    change,
                });
            }
            if 2 * n > self.max_nodes {
                return Err(Error::Quadrature {
                    estimate: next,
                    change,
                    nodes: n,
                });
            }
            prev = next;
        }
    }
}

/// An accepted quadrature estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub nodes: usize,
    /// Difference to the estimate with half the nodes.
    pub change: f64,
}

/// Which part of a pair average to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// The whole direct part `−mᵢmⱼ/|xᵢ − xⱼ|`.
    Full,
    /// The `ε^k` coefficient of `−mᵢmⱼ/|εxᵢ − xⱼ|`.
    Legendre(u8),
}

fn node(k: usize, n: usize) -> f64 {
    TAU * k as f64 / n as f64
}

/// Positions at `ℓ = 2πk/n`.
pub fn sample_positions(el: &EllipseElements, n: usize) -> Vec<Vec3> {
    (0..n).map(|k| el.position_and_tangent(node(k, n)).0).collect()
}

/// Momenta at `ℓ = 2πk/n`.
pub fn sample_momenta(el: &EllipseElements, masses: &SystemMasses, body: usize, n: usize) -> Vec<Vec3> {
    let scale = masses.reduced(body) * masses.mean_motion(body, el.a);
    (0..n).map(|k| el.position_and_tangent(node(k, n)).1 * scale).collect()
}

fn mean_vec(v: &[Vec3]) -> Vec3 {
    let comp = |c: usize| pairwise_sum(&v.iter().map(|p| p[c]).collect::<Vec<_>>()) / v.len() as f64;
    Vec3::new(comp(0), comp(1), comp(2))
}

/// Single-ellipse averages `⟨1/|x|⟩`, `⟨y⟩`, `⟨x/|x|³⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerAverages {
    pub inverse_distance: f64,
    pub momentum: Vec3,
    pub force: Vec3,
    pub nodes: usize,
}

pub fn kepler_averages(
    el: &EllipseElements,
    masses: &SystemMasses,
    body: usize,
    spec: &QuadratureSpec,
) -> Result<KeplerAverages> {
    el.validate()?;
    let sample = |n: usize| {
        let x = sample_positions(el, n);
        let inv: Vec<f64> = x.iter().map(|p| 1.0 / p.norm()).collect();
        let force: Vec<Vec3> = x.iter().map(|p| p / p.norm().powi(3)).collect();
        (pairwise_sum(&inv) / n as f64, mean_vec(&sample_momenta(el, masses, body, n)), mean_vec(&force))
    };
    // Accept on the slowest of the three scalar sequences.
    let mut last = None;
    let q = spec.converge(|n| {
        let (inv, mom, force) = sample(n);
        let combined = inv * el.a + mom.norm() + force.norm() * el.a * el.a;
        last = Some((inv, mom, force));
        Ok(combined)
    })?;
    let (inverse_distance, momentum, force) = last.expect("converge evaluates at least once");
    Ok(KeplerAverages {
        inverse_distance,
        momentum,
        force,
        nodes: q.nodes,
    })
}

fn legendre(k: u8, c: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => c,
        2 => 0.5 * (3.0 * c * c - 1.0),
        3 => 0.5 * c * (5.0 * c * c - 3.0),
        _ => (35.0 * c.powi(4) - 30.0 * c * c + 3.0) / 8.0,
    }
}

fn check_pair(els: &[EllipseElements], pair: (usize, usize)) -> Result<()> {
    let (i, j) = pair;
    if i >= j || j >= els.len() {
        return Err(Error::domain("pair must satisfy i < j < n"));
    }
    Ok(())
}

/// Reject configurations whose orbits come close on a coarse grid.
fn collision_precheck(ei: &EllipseElements, ej: &EllipseElements, pair: (usize, usize)) -> Result<()> {
    let guard = 10.0 * DEFAULT_COLLISION_RADIUS * ei.a.min(ej.a);
    let xi = sample_positions(ei, 32);
    let xj = sample_positions(ej, 32);
    let mut dmin = f64::INFINITY;
    for p in &xi {
        for q in &xj {
            dmin = dmin.min((p - q).norm());
        }
    }
    if dmin <= guard {
        return Err(Error::Collision {
            a: pair.0,
            b: Some(pair.1),
            distance: dmin,
            guard,
        });
    }
    Ok(())
}

/// Torus average of `kernel(xᵢ, xⱼ)` with pairwise summation.
fn torus_mean(xi: &[Vec3], xj: &[Vec3], kernel: impl Fn(&Vec3, &Vec3) -> f64) -> f64 {
    let mut row = Vec::with_capacity(xj.len());
    let rows: Vec<f64> = xi
        .iter()
        .map(|p| {
            row.clear();
            row.extend(xj.iter().map(|q| kernel(p, q)));
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&rows) / (xi.len() * xj.len()) as f64
}

/// Average of the direct interaction of bodies `pair = (i, j)`, `i < j`.
pub fn pair_average(
    els: &[EllipseElements],
    masses: &SystemMasses,
    pair: (usize, usize),
    order: Order,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    check_pair(els, pair)?;
    let (i, j) = pair;
    let (ei, ej) = (&els[i], &els[j]);
    ei.validate()?;
    ej.validate()?;
    let coupling = -masses.planet(i) * masses.planet(j);
    match order {
        Order::Full => {
            collision_precheck(ei, ej, pair)?;
            spec.converge(|n| {
                let (xi, xj) = (sample_positions(ei, n), sample_positions(ej, n));
                Ok(coupling * torus_mean(&xi, &xj, |p, q| 1.0 / (p - q).norm()))
            })
        }
        Order::Legendre(k) => {
            if k > MAX_LEGENDRE_ORDER {
                return Err(Error::domain("Legendre order above 4"));
            }
            if !(ei.a / ej.a < MAX_AXIS_RATIO) {
                return Err(Error::domain("order terms need a_i/a_j < 0.5"));
            }
            spec.converge(|n| {
                let (xi, xj) = (sample_positions(ei, n), sample_positions(ej, n));
                Ok(coupling
                    * torus_mean(&xi, &xj, |p, q| {
                        let (rp, rq) = (p.norm(), q.norm());
                        let c = p.dot(q) / (rp * rq);
                        rp.powi(k as i32) / rq.powi(k as i32 + 1) * legendre(k, c)
                    }))
            })
        }
    }
}

/// Average of `yᵢ·yⱼ/m₀`. The integrand is a product, so this is
/// `⟨yᵢ⟩·⟨yⱼ⟩/m₀` exactly, also at the discrete level.
pub fn indirect_average(
    els: &[EllipseElements],
    masses: &SystemMasses,
    pair: (usize, usize),
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_pair(els, pair)?;
    let (i, j) = pair;
    let yi = kepler_averages(&els[i], masses, i, spec)?.momentum;
    let yj = kepler_averages(&els[j], masses, j, spec)?.momentum;
    Ok(yi.dot(&yj) / masses.m0())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularAverage {
    pub direct: f64,
    pub indirect: f64,
    pub nodes: usize,
}

impl SecularAverage {
    pub fn total(&self) -> f64 {
        self.direct + self.indirect
    }
}

/// Full average of the pair perturbation, direct and indirect.
pub fn secular_average(
    els: &[EllipseElements],
    masses: &SystemMasses,
    pair: (usize, usize),
    spec: &QuadratureSpec,
) -> Result<SecularAverage> {
    let direct = pair_average(els, masses, pair, Order::Full, spec)?;
    let indirect = indirect_average(els, masses, pair, spec)?;
    Ok(SecularAverage {
        direct: direct.value,
        indirect,
        nodes: direct.nodes,
    })
}

/// Sum over all pairs of the averaged perturbation.
pub fn system_average(els: &[EllipseElements], masses: &SystemMasses, spec: &QuadratureSpec) -> Result<f64> {
    let mut terms = Vec::new();
    for i in 0..els.len() {
        for j in i + 1..els.len() {
            terms.push(secular_average(els, masses, (i, j), spec)?.total());
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Averaged perturbation as a function of Poincaré actions and `z`.
pub fn poincare_average(chart: &PoincareChart, lambda: &[f64], z: &SecularZ, spec: &QuadratureSpec) -> Result<f64> {
    let longitudes = alloc::vec![0.0; lambda.len()];
    let els = chart.ellipses(lambda, z, &longitudes)?;
    system_average(&els, &chart.masses, spec)
}

/// A pair average evaluated at a point of the reduced chart.
#[derive(Debug, Clone)]
pub struct SecularTerm {
    pub pair: (usize, usize),
    pub order: Order,
    pub spec: QuadratureSpec,
}

impl SecularTerm {
    pub fn new(pair: (usize, usize), order: Order) -> Self {
        Self {
            pair,
            order,
            spec: QuadratureSpec::default(),
        }
    }

    pub fn with_spec(mut self, spec: QuadratureSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn evaluate(&self, chart: &PStarChart, coords: &PStarCoords) -> Result<f64> {
        let els = chart.elements(coords)?;
        Ok(pair_average(&els, &chart.masses, self.pair, self.order, &self.spec)?.value)
    }

    /// Coordinates the term may depend on.
    ///
    /// For bodies `i < j` (0-based) these are `Λᵢ, Λⱼ`, `χ` from `i` to
    /// `min(j+1, n−1)`, `Θ` and `ϑ` from `i+1` to `min(j+1, n−1)`, and `κ`
    /// from `i+1` to `j`. The quadrupole of the outermost pair also drops
    /// `κₙ₋₁`.
    pub fn dependence_set(&self, n: usize) -> Vec<PStarCoord> {
        let (i, j) = self.pair;
        let top = (j + 1).min(n - 1);
        let mut out = alloc::vec![PStarCoord::Lambda(i), PStarCoord::Lambda(j)];
        out.extend((i..=top).map(PStarCoord::Chi));
        out.extend((i + 1..=top).map(PStarCoord::Theta));
        out.extend((i + 1..=top).map(PStarCoord::Vartheta));
        out.extend((i + 1..=j).map(PStarCoord::Kappa));
        if self.order == Order::Legendre(2) && i + 1 == j && j + 1 == n {
            out.retain(|c| *c != PStarCoord::Kappa(n - 1));
        }
        out
    }

    /// Every coordinate outside [`Self::dependence_set`], mean anomalies
    /// included.
    pub fn excluded_coordinates(&self, n: usize) -> Vec<PStarCoord> {
        let keep = self.dependence_set(n);
        PStarCoord::all(n).into_iter().filter(|c| !keep.contains(c)).collect()
    }
}

/// Outcome of varying one coordinate with the rest fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub coord: PStarCoord,
    /// `max − min` over the evaluated grid points.
    pub max_variation: f64,
    pub evaluated: usize,
    /// Grid values that left the chart domain.
    pub skipped: Vec<f64>,
}

impl Probe {
    pub fn truncated(&self) -> bool {
        !self.skipped.is_empty()
    }
}

pub fn dependence_probe<F>(mut f: F, base: &PStarCoords, coord: PStarCoord, grid: &[f64]) -> Result<Probe>
where
    F: FnMut(&PStarCoords) -> Result<f64>,
{
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut evaluated = 0;
    let mut skipped = Vec::new();
    for &v in grid {
        match f(&base.with(coord, v)) {
            Ok(val) => {
                lo = lo.min(val);
                hi = hi.max(val);
                evaluated += 1;
            }
            Err(Error::ChartSingular { .. } | Error::VanishingNode { .. } | Error::Domain(_) | Error::Collision { .. }) => {
                skipped.push(v)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Probe {
        coord,
        max_variation: if evaluated > 0 { hi - lo } else { 0.0 },
        evaluated,
        skipped,
    })
}

/// Default probe grid: the full circle for angles, `±rel` around the base
/// value for actions.
pub fn probe_grid(coord: PStarCoord, base: &PStarCoords, count: usize, rel: f64) -> Vec<f64> {
    let v = base.get(coord);
    if coord.is_angle() {
        (0..count).map(|k| node(k, count)).collect()
    } else {
        let span = rel * v.abs().max(1e-3);
        (0..count)
            .map(|k| v - span + 2.0 * span * k as f64 / (count.max(2) - 1) as f64)
            .collect()
    }
}

/// Quadrupole of the outermost pair on a `(Θₙ₋₁, ϑₙ₋₁)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRaster {
    pub theta: Vec<f64>,
    pub vartheta: Vec<f64>,
    /// Row-major in `theta`; `None` outside the chart domain.
    pub values: Vec<Option<f64>>,
}

impl PhaseRaster {
    pub fn get(&self, it: usize, iv: usize) -> Option<f64> {
        self.values[it * self.vartheta.len() + iv]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.theta.len(), self.vartheta.len())
    }

    /// Whether the sublevel (or superlevel) component of `level` containing
    /// the cell `center` stays inside the raster. The side is chosen by the
    /// value at `center`.
    pub fn encloses(&self, center: (usize, usize), level: f64) -> bool {
        let (nt, nv) = self.shape();
        let Some(c) = self.get(center.0, center.1) else {
            return false;
        };
        let below = c < level;
        let inside = |v: Option<f64>| v.is_some_and(|v| (v < level) == below);
        let mut seen = alloc::vec![false; nt * nv];
        let mut stack = alloc::vec![center];
        seen[center.0 * nv + center.1] = true;
        while let Some((it, iv)) = stack.pop() {
            if it == 0 || iv == 0 || it + 1 == nt || iv + 1 == nv {
                return false;
            }
            for (dt, dv) in [(-1_isize, 0_isize), (1, 0), (0, -1), (0, 1)] {
                let (a, b) = ((it as isize + dt) as usize, (iv as isize + dv) as usize);
                let idx = a * nv + b;
                if seen[idx] {
                    continue;
                }
                match self.values[idx] {
                    None => return false,
                    v if inside(v) => {
                        seen[idx] = true;
                        stack.push((a, b));
                    }
                    _ => {}
                }
            }
        }
        true
    }
}

pub fn quadrupole_phase_portrait(
    chart: &PStarChart,
    base: &PStarCoords,
    theta_half_width: f64,
    vartheta_half_width: f64,
    shape: (usize, usize),
    spec: &QuadratureSpec,
) -> Result<PhaseRaster> {
    let n = chart.masses.n();
    if n < 2 || base.n() != n {
        return Err(Error::domain("phase portrait needs n ≥ 2 and matching coordinates"));
    }
    let (nt, nv) = shape;
    if nt < 3 || nv < 3 {
        return Err(Error::domain("phase portrait grid needs at least 3×3 cells"));
    }
    let term = SecularTerm::new((n - 2, n - 1), Order::Legendre(2)).with_spec(*spec);
    let lin = |k: usize, m: usize, half: f64, mid: f64| mid - half + 2.0 * half * k as f64 / (m - 1) as f64;
    let theta: Vec<f64> = (0..nt).map(|k| lin(k, nt, theta_half_width, 0.0)).collect();
    let vartheta: Vec<f64> = (0..nv).map(|k| lin(k, nv, vartheta_half_width, PI)).collect();
    let mut values = Vec::with_capacity(nt * nv);
    for &t in &theta {
        for &v in &vartheta {
            let c = base
                .with(PStarCoord::Theta(n - 1), t)
                .with(PStarCoord::Vartheta(n - 1), v);
            values.push(match term.evaluate(chart, &c) {
                Ok(x) => Some(x),
                Err(Error::ChartSingular { .. } | Error::VanishingNode { .. } | Error::Domain(_)) => None,
                Err(e) => return Err(e),
            });
        }
    }
    Ok(PhaseRaster {
        theta,
        vartheta,
        values,
    })
}
