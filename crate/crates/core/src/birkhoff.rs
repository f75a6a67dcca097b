//! First-order Birkhoff invariants of the averaged perturbation at the
//! co-circular, co-planar point, in Poincaré variables.
//!
//! Near `z = 0` the average expands as
//!
//! ```text
//! C₀ + Σ Qh_ij (η_i η_j + ξ_i ξ_j) + Σ Qv_ij (p_i p_j + q_i q_j) + O(|z|⁴)
//! ```
//!
//! and the invariants are the eigenvalues of `Qh` and `Qv`.
//!
//! Second derivatives of a quadrature are only as good as the quadrature
//! noise allows. Every increment `f(z) − f(0)` is therefore accumulated node
//! by node on one fixed grid in the mean longitudes, so the rounding error
//! scales with the increment rather than with `C₀`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::charts::{PoincareChart, SecularZ};
use crate::diophantine::l1_shell;
use crate::geometry::{pairwise_sum, Vec3};
use crate::secular::QuadratureSpec;
use crate::two_body::{EllipseElements, SystemMasses};
use crate::{Error, Result};

/// Finite-difference step in `z`, relative to `√Λᵢ`.
pub const DEFAULT_STEP: f64 = 1e-2;
/// Largest admitted ratio of consecutive semi-major axes.
pub const DEFAULT_ALPHA_MAX: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirkhoffSpec {
    /// Tolerance used to pick the fixed node count from `C₀`.
    pub quadrature: QuadratureSpec,
    pub step: f64,
    pub alpha_max: f64,
}

impl Default for BirkhoffSpec {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default().with_tol(1e-13),
            step: DEFAULT_STEP,
            alpha_max: DEFAULT_ALPHA_MAX,
        }
    }
}

/// Block of the secular variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Eta,
    Xi,
    P,
    Q,
}

impl Block {
    fn slot(self, z: &mut SecularZ) -> &mut Vec<f64> {
        match self {
            Block::Eta => &mut z.eta,
            Block::Xi => &mut z.xi,
            Block::P => &mut z.p,
            Block::Q => &mut z.q,
        }
    }
}

/// Positions and mean momentum of one body on the fixed grid.
struct BodySamples {
    x: Vec<Vec3>,
    mean_y: Vec3,
}

fn body_samples(el: &EllipseElements, masses: &SystemMasses, body: usize, nodes: usize) -> BodySamples {
    let scale = masses.reduced(body) * masses.mean_motion(body, el.a);
    let mut x = Vec::with_capacity(nodes);
    let mut y = [Vec::with_capacity(nodes), Vec::with_capacity(nodes), Vec::with_capacity(nodes)];
    for k in 0..nodes {
        let (pos, tangent) = el.position_and_tangent(el.mean_anomaly + TAU * k as f64 / nodes as f64);
        x.push(pos);
        for c in 0..3 {
            y[c].push(tangent[c] * scale);
        }
    }
    let mean = |v: &Vec<f64>| pairwise_sum(v) / nodes as f64;
    BodySamples {
        x,
        mean_y: Vec3::new(mean(&y[0]), mean(&y[1]), mean(&y[2])),
    }
}

/// The averaged perturbation at fixed `Λ` on a fixed grid of mean
/// longitudes, with a cached copy of the grid at `z = 0`.
pub struct SecularSampler<'a> {
    chart: &'a PoincareChart,
    lambda: Vec<f64>,
    nodes: usize,
    base: Vec<BodySamples>,
}

impl<'a> SecularSampler<'a> {
    pub fn new(chart: &'a PoincareChart, lambda: &[f64], nodes: usize) -> Result<Self> {
        let base = Self::samples(chart, lambda, &SecularZ::zeros(lambda.len()), nodes)?;
        Ok(Self {
            chart,
            lambda: lambda.to_vec(),
            nodes,
            base,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn samples(chart: &PoincareChart, lambda: &[f64], z: &SecularZ, nodes: usize) -> Result<Vec<BodySamples>> {
        let els = chart.ellipses(lambda, z, &vec![0.0; lambda.len()])?;
        Ok(els
            .iter()
            .enumerate()
            .map(|(i, el)| body_samples(el, &chart.masses, i, nodes))
            .collect())
    }

    /// Grid value of the average at `z = 0`.
    pub fn value_at_origin(&self) -> f64 {
        let m = &self.chart.masses;
        let n = self.base.len();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let coupling = -m.planet(i) * m.planet(j);
                let direct = self.grid_mean(i, j, |p, q| 1.0 / (p - q).norm(), None);
                terms.push(coupling * direct + self.base[i].mean_y.dot(&self.base[j].mean_y) / m.m0());
            }
        }
        pairwise_sum(&terms)
    }

    /// `f(z) − f(0)` accumulated node by node.
    pub fn increment(&self, z: &SecularZ) -> Result<f64> {
        let cur = Self::samples(self.chart, &self.lambda, z, self.nodes)?;
        let m = &self.chart.masses;
        let n = cur.len();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let coupling = -m.planet(i) * m.planet(j);
                let direct = self.grid_mean(i, j, |p, q| 1.0 / (p - q).norm(), Some(&cur));
                let indirect = (cur[i].mean_y.dot(&cur[j].mean_y)
                    - self.base[i].mean_y.dot(&self.base[j].mean_y))
                    / m.m0();
                terms.push(coupling * direct + indirect);
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Mean of `kernel` over the grid, or of its increment against the base
    /// grid when `cur` is given.
    fn grid_mean(&self, i: usize, j: usize, kernel: impl Fn(&Vec3, &Vec3) -> f64, cur: Option<&[BodySamples]>) -> f64 {
        let (bi, bj) = (&self.base[i].x, &self.base[j].x);
        let mut row = Vec::with_capacity(self.nodes);
        let mut rows = Vec::with_capacity(self.nodes);
        for k in 0..self.nodes {
            row.clear();
            match cur {
                None => row.extend(bj.iter().map(|q| kernel(&bi[k], q))),
                Some(c) => {
                    let (ci, cj) = (&c[i].x, &c[j].x);
                    row.extend((0..self.nodes).map(|l| kernel(&ci[k], &cj[l]) - kernel(&bi[k], &bj[l])));
                }
            }
            rows.push(pairwise_sum(&row));
        }
        pairwise_sum(&rows) / (self.nodes * self.nodes) as f64
    }

    /// Coefficient of `t²` in `f(t v) − f(0)`, from symmetric second
    /// differences at `h`, `2h`, `4h` with the `t⁴` and `t⁶` terms
    /// eliminated by two Richardson steps.
    pub fn quadratic_coefficient(&self, v: &SecularZ, h: f64) -> Result<f64> {
        let second = |t: f64| -> Result<f64> {
            let plus = self.increment(&scaled(v, t))?;
            let minus = self.increment(&scaled(v, -t))?;
            Ok((plus + minus) / (2.0 * t * t))
        };
        let d1 = second(h)?;
        let d2 = second(2.0 * h)?;
        let d4 = second(4.0 * h)?;
        let r1 = (4.0 * d1 - d2) / 3.0;
        let r2 = (4.0 * d2 - d4) / 3.0;
        Ok((16.0 * r1 - r2) / 15.0)
    }

    /// Coefficient matrix of one block, `Σ M_ij w_i w_j`.
    pub fn block_matrix(&self, block: Block, h: f64) -> Result<DMatrix<f64>> {
        let n = self.lambda.len();
        let scale: Vec<f64> = self.lambda.iter().map(|l| l.sqrt()).collect();
        let dir = |pairs: &[(usize, f64)]| {
            let mut z = SecularZ::zeros(n);
            for &(i, s) in pairs {
                block.slot(&mut z)[i] = s * scale[i];
            }
            z
        };
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = self.quadratic_coefficient(&dir(&[(i, 1.0)]), h)? / self.lambda[i];
            for j in 0..i {
                let plus = self.quadratic_coefficient(&dir(&[(i, 1.0), (j, 1.0)]), h)?;
                let minus = self.quadratic_coefficient(&dir(&[(i, 1.0), (j, -1.0)]), h)?;
                let v = (plus - minus) / (4.0 * scale[i] * scale[j]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }
}

fn scaled(v: &SecularZ, t: f64) -> SecularZ {
    let f: Vec<f64> = v.to_flat().iter().map(|x| x * t).collect();
    SecularZ::from_flat(&f).expect("same length")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffInvariants {
    /// Average at the co-circular, co-planar point.
    pub c0: f64,
    pub qh: DMatrix<f64>,
    pub qv: DMatrix<f64>,
    /// Eigenvalues of `qh`, ascending.
    pub sigma: Vec<f64>,
    /// Eigenvalues of `qv`, ascending.
    pub varsigma: Vec<f64>,
    /// Grid size used for the increments.
    pub nodes: usize,
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain(alloc::format!("{name} must be square")));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::domain(alloc::format!("{name} must be symmetric")));
    }
    Ok(())
}

impl BirkhoffInvariants {
    pub fn from_matrices(c0: f64, qh: DMatrix<f64>, qv: DMatrix<f64>, nodes: usize) -> Result<Self> {
        check_symmetric(&qh, "Qh")?;
        check_symmetric(&qv, "Qv")?;
        if qh.nrows() != qv.nrows() {
            return Err(Error::Dimension {
                expected: qh.nrows(),
                got: qv.nrows(),
            });
        }
        Ok(Self {
            sigma: sorted_eigenvalues(&qh),
            varsigma: sorted_eigenvalues(&qv),
            c0,
            qh,
            qv,
            nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// `Σ Qh_ij (η_iη_j + ξ_iξ_j) + Σ Qv_ij (p_ip_j + q_iq_j)`.
    pub fn quadratic_form(&self, z: &SecularZ) -> f64 {
        let form = |m: &DMatrix<f64>, a: &[f64]| {
            let v = nalgebra::DVector::from_column_slice(a);
            v.dot(&(m * &v))
        };
        form(&self.qh, &z.eta) + form(&self.qh, &z.xi) + form(&self.qv, &z.p) + form(&self.qv, &z.q)
    }

    /// The planar frequencies followed by the vertical ones with the
    /// smallest in modulus removed.
    pub fn reduced_frequencies(&self) -> Vec<f64> {
        let mut out = self.sigma.clone();
        let drop = smallest_modulus(&self.varsigma);
        out.extend(self.varsigma.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| *v));
        out
    }
}

fn smallest_modulus(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() < v[best].abs() {
            best = i;
        }
    }
    best
}

/// Compute `C₀`, `Qh`, `Qv` and their eigenvalues at actions `lambda`.
pub fn compute_invariants(lambda: &[f64], masses: &SystemMasses, spec: &BirkhoffSpec) -> Result<BirkhoffInvariants> {
    let n = masses.n();
    if lambda.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: lambda.len(),
        });
    }
    if n < 2 {
        return Err(Error::domain("invariants need at least two planets"));
    }
    if lambda.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::domain("Λ must be positive"));
    }
    for i in 0..n - 1 {
        let ratio = masses.axis_from_lambda(i, lambda[i]) / masses.axis_from_lambda(i + 1, lambda[i + 1]);
        if !(ratio <= spec.alpha_max) {
            return Err(Error::domain(alloc::format!(
                "semi-axis ratio {ratio} of planets {i}, {} exceeds {}",
                i + 1,
                spec.alpha_max
            )));
        }
    }
    if !(spec.step > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    let chart = PoincareChart::new(masses.clone());
    // Pick the grid from the convergence of C₀, then double it once more.
    let accepted = spec
        .quadrature
        .converge(|nodes| Ok(SecularSampler::new(&chart, lambda, nodes)?.value_at_origin()))?;
    let sampler = SecularSampler::new(&chart, lambda, 2 * accepted.nodes)?;
    let qh = sampler.block_matrix(Block::Eta, spec.step)?;
    let qv = sampler.block_matrix(Block::P, spec.step)?;
    BirkhoffInvariants::from_matrices(sampler.value_at_origin(), qh, qv, sampler.nodes())
}

/// Residuals of the two identities expected of the invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceCheck {
    /// Smallest `|ς_i|`.
    pub varsigma_min: f64,
    /// `|Σ (σ_i + ς_i)|`.
    pub trace_sum: f64,
    /// Euclidean norm of `(σ, ς)`.
    pub scale: f64,
}

impl ResonanceCheck {
    pub fn relative(&self) -> (f64, f64) {
        (self.varsigma_min / self.scale, self.trace_sum / self.scale)
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        let (a, b) = self.relative();
        a < rel_tol && b < rel_tol
    }
}

pub fn resonance_check(inv: &BirkhoffInvariants) -> ResonanceCheck {
    let all: Vec<f64> = inv.sigma.iter().chain(&inv.varsigma).copied().collect();
    ResonanceCheck {
        varsigma_min: inv.varsigma[smallest_modulus(&inv.varsigma)].abs(),
        trace_sum: pairwise_sum(&all).abs(),
        scale: all.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Smallest `|ω·k|` over the searched lattice vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NonResonance {
    pub k: Vec<i64>,
    pub value: f64,
    pub searched: usize,
}

/// Minimise `|ω·k|` for the reduced frequencies `ω` over `0 < |k|₁ ≤ 2p`,
/// skipping the multiples of `(1, …, 1)`.
pub fn nonresonance_probe(inv: &BirkhoffInvariants, order: u32) -> Result<NonResonance> {
    if !(1..=3).contains(&order) {
        return Err(Error::domain("order must be 1, 2 or 3"));
    }
    nonresonance_search(&inv.reduced_frequencies(), order)
}

pub fn nonresonance_search(omega: &[f64], order: u32) -> Result<NonResonance> {
    let mut best: Option<NonResonance> = None;
    let mut searched = 0;
    for r in 1..=2 * order {
        for k in l1_shell(omega.len(), r) {
            if k.iter().all(|&c| c == k[0]) {
                continue;
            }
            searched += 1;
            let value = k.iter().zip(omega).map(|(&c, w)| c as f64 * w).sum::<f64>().abs();
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(NonResonance { k, value, searched: 0 });
            }
        }
    }
    let mut out = best.ok_or_else(|| Error::domain("no lattice vector to search"))?;
    out.searched = searched;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lambdas(masses: &SystemMasses, axes: &[f64]) -> Vec<f64> {
        axes.iter().enumerate().map(|(i, a)| masses.lambda_from_axis(i, *a)).collect()
    }

    fn random_axes(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let mut a = vec![1.0];
        for _ in 1..n {
            let last = *a.last().unwrap();
            a.push(last / rng.random_range(0.05..0.19));
        }
        a
    }

    /// Laplace coefficient `b_s^(j)(α)` from its hypergeometric series.
    fn laplace(s: f64, j: u32, alpha: f64) -> f64 {
        let mut lead = 2.0 * alpha.powi(j as i32);
        for m in 0..j {
            lead *= (s + m as f64) / (m as f64 + 1.0);
        }
        let (mut term, mut sum) = (1.0, 0.0);
        for k in 0..400 {
            sum += term;
            let k = k as f64;
            term *= (s + k) * (s + j as f64 + k) / ((k + 1.0) * (j as f64 + 1.0 + k)) * alpha * alpha;
        }
        lead * sum
    }

    #[test]
    fn laplace_series_matches_its_integral() {
        let alpha: f64 = 0.3;
        let steps = 4000;
        for j in [1, 2] {
            let integral = (0..steps)
                .map(|k| {
                    let psi = TAU * k as f64 / steps as f64;
                    (j as f64 * psi).cos() / (1.0 - 2.0 * alpha * psi.cos() + alpha * alpha).powf(1.5)
                })
                .sum::<f64>()
                * TAU
                / steps as f64
                / core::f64::consts::PI;
            assert!((integral - laplace(1.5, j, alpha)).abs() < 1e-13);
        }
    }

    #[test]
    fn two_planets_match_classical_secular_theory() {
        let masses = SystemMasses::new(1.0, 1e-3, vec![1.0, 1.0]).unwrap();
        let axes = [1.0, 10.0];
        let lam = lambdas(&masses, &axes);
        let inv = compute_invariants(&lam, &masses, &BirkhoffSpec::default()).unwrap();

        let alpha = axes[0] / axes[1];
        let (b1, b2) = (laplace(1.5, 1, alpha), laplace(1.5, 2, alpha));
        let c = -masses.planet(0) * masses.planet(1) / axes[1] * alpha / 8.0;
        let root = (lam[0] * lam[1]).sqrt();
        let qh = DMatrix::from_row_slice(2, 2, &[c * b1 / lam[0], -c * b2 / root, -c * b2 / root, c * b1 / lam[1]]);
        let qv = DMatrix::from_row_slice(2, 2, &[-c * b1 / lam[0], c * b1 / root, c * b1 / root, -c * b1 / lam[1]]);
        let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax() / b.amax();
        assert!(rel(&inv.qh, &qh) < 1e-6, "{} vs {}", inv.qh, qh);
        assert!(rel(&inv.qv, &qv) < 1e-6, "{} vs {}", inv.qv, qv);
        let expected: Vec<f64> = sorted_eigenvalues(&qh).into_iter().chain(sorted_eigenvalues(&qv)).collect();
        let got: Vec<f64> = inv.sigma.iter().chain(&inv.varsigma).copied().collect();
        let scale = expected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-6 * scale, "{got:?} vs {expected:?}");
        }
        // C₀ is minus the mean inverse distance of two circles
        let c0 = -masses.planet(0) * masses.planet(1) / axes[1] * 0.5 * laplace(0.5, 0, alpha);
        assert!((inv.c0 - c0).abs() < 1e-12 * c0.abs());
    }

    fn sampler_setup(n: usize, seed: u64) -> (PoincareChart, Vec<f64>, usize) {
        let masses = SystemMasses::new(1.0, 1e-3, vec![1.0, 0.6, 1.3, 0.8][..n].to_vec()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lam = lambdas(&masses, &random_axes(&mut rng, n));
        (PoincareChart::new(masses), lam, 128)
    }

    #[test]
    fn horizontal_blocks_agree() {
        let (chart, lam, nodes) = sampler_setup(3, 1);
        let s = SecularSampler::new(&chart, &lam, nodes).unwrap();
        let eta = s.block_matrix(Block::Eta, DEFAULT_STEP).unwrap();
        let xi = s.block_matrix(Block::Xi, DEFAULT_STEP).unwrap();
        let p = s.block_matrix(Block::P, DEFAULT_STEP).unwrap();
        let q = s.block_matrix(Block::Q, DEFAULT_STEP).unwrap();
        assert!((&eta - &xi).amax() < 1e-10 * eta.amax());
        assert!((&p - &q).amax() < 1e-10 * p.amax());
    }

    #[test]
    fn cross_blocks_vanish() {
        let (chart, lam, nodes) = sampler_setup(3, 2);
        let s = SecularSampler::new(&chart, &lam, nodes).unwrap();
        let scale = s.block_matrix(Block::Eta, DEFAULT_STEP).unwrap().amax();
        let blocks = [Block::Eta, Block::Xi, Block::P, Block::Q];
        for (ai, a) in blocks.iter().enumerate() {
            for b in &blocks[ai + 1..] {
                for i in 0..3 {
                    for j in 0..3 {
                        let dir = |sign: f64| {
                            let mut z = SecularZ::zeros(3);
                            a.slot(&mut z)[i] = lam[i].sqrt();
                            b.slot(&mut z)[j] = sign * lam[j].sqrt();
                            z
                        };
                        let plus = s.quadratic_coefficient(&dir(1.0), DEFAULT_STEP).unwrap();
                        let minus = s.quadratic_coefficient(&dir(-1.0), DEFAULT_STEP).unwrap();
                        let cross = (plus - minus) / (4.0 * (lam[i] * lam[j]).sqrt());
                        assert!(cross.abs() < 1e-9 * scale, "{a:?}{i} {b:?}{j}: {cross}");
                    }
                }
            }
        }
    }

    #[test]
    fn remainder_is_fourth_order() {
        let (chart, lam, _) = sampler_setup(3, 3);
        let inv = compute_invariants(&lam, &chart.masses, &BirkhoffSpec::default()).unwrap();
        let s = SecularSampler::new(&chart, &lam, inv.nodes).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let flat: Vec<f64> = (0..12).map(|k| rng.random_range(-1.0..1.0) * lam[k % 3].sqrt()).collect();
        let dir = SecularZ::from_flat(&flat).unwrap();
        let mut pts = Vec::new();
        for t in [0.02, 0.04, 0.08] {
            let z = scaled(&dir, t);
            let rem = s.increment(&z).unwrap() - inv.quadratic_form(&z);
            pts.push((f64::ln(t), rem.abs().ln()));
        }
        let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
        assert!((slope - 4.0).abs() < 0.5, "slope {slope}");
    }

    #[test]
    fn secular_degeneracies_hold() {
        for (n, seed) in [(2, 10), (2, 11), (3, 12), (3, 13)] {
            let (chart, lam, _) = sampler_setup(n, seed);
            let inv = compute_invariants(&lam, &chart.masses, &BirkhoffSpec::default()).unwrap();
            let check = resonance_check(&inv);
            assert!(check.passes(1e-8), "n={n}: {check:?}");
        }
    }

    #[test]
    fn perturbed_vertical_matrix_breaks_the_check() {
        let (chart, lam, _) = sampler_setup(2, 14);
        let inv = compute_invariants(&lam, &chart.masses, &BirkhoffSpec::default()).unwrap();
        let mut qv = inv.qv.clone();
        qv[(0, 0)] += 1e-3;
        let broken = BirkhoffInvariants::from_matrices(inv.c0, inv.qh.clone(), qv, inv.nodes).unwrap();
        assert!(!resonance_check(&broken).passes(1e-8));
    }

    #[test]
    fn asymmetric_matrices_are_rejected() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.1;
        assert!(BirkhoffInvariants::from_matrices(0.0, m.clone(), DMatrix::identity(2, 2), 0).is_err());
    }

    #[test]
    fn crowded_systems_are_rejected() {
        let masses = SystemMasses::new(1.0, 1e-3, vec![1.0, 1.0]).unwrap();
        let lam = lambdas(&masses, &[1.0, 2.0]);
        assert!(matches!(compute_invariants(&lam, &masses, &BirkhoffSpec::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn invariants_scale_with_planet_masses() {
        let axes = [1.0, 7.0];
        let spec = BirkhoffSpec::default();
        let light = SystemMasses::new(1.0, 1e-6, vec![1.0, 0.5]).unwrap();
        let heavy = SystemMasses::new(1.0, 1e-6, vec![2.0, 1.0]).unwrap();
        let a = compute_invariants(&lambdas(&light, &axes), &light, &spec).unwrap();
        let b = compute_invariants(&lambdas(&heavy, &axes), &heavy, &spec).unwrap();
        // f doubles twice, the actions once
        for (x, y) in a.sigma.iter().zip(&b.sigma) {
            assert!((y / x - 2.0).abs() < 1e-5);
        }
        let x = a.varsigma.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let y = b.varsigma.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((y / x - 2.0).abs() < 1e-5);
    }

    #[test]
    fn nonresonance_matches_exhaustive_search() {
        let masses = SystemMasses::new(1.0, 1e-3, vec![1.0, 1.0]).unwrap();
        let lam = lambdas(&masses, &[1.0, 20.0]);
        let inv = compute_invariants(&lam, &masses, &BirkhoffSpec::default()).unwrap();
        let found = nonresonance_probe(&inv, 2).unwrap();
        assert!(found.value > 0.0);

        let omega = inv.reduced_frequencies();
        assert_eq!(omega.len(), 3);
        let mut best = f64::INFINITY;
        let mut count = 0;
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                for c in -4i64..=4 {
                    let l1 = a.abs() + b.abs() + c.abs();
                    if l1 == 0 || l1 > 4 || (a == b && b == c) {
                        continue;
                    }
                    count += 1;
                    best = best.min((a as f64 * omega[0] + b as f64 * omega[1] + c as f64 * omega[2]).abs());
                }
            }
        }
        assert_eq!(found.searched, count);
        assert_eq!(found.value, best);
        assert!(!found.k.iter().all(|&c| c == found.k[0]));

        let doubled: Vec<f64> = omega.iter().map(|w| 3.0 * w).collect();
        let again = nonresonance_search(&doubled, 2).unwrap();
        assert!((again.value - 3.0 * found.value).abs() < 1e-14 * found.value.max(1e-300));
    }

    #[test]
    fn ones_vector_is_resonant_and_skipped() {
        let omega = [1.0, 2.0f64.sqrt(), -1.0 - 2.0f64.sqrt()];
        let found = nonresonance_search(&omega, 2).unwrap();
        assert!(found.value > 0.0);
    }
}
