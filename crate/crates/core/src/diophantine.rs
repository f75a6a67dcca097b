//! Multi-scale Diophantine sets, small-divisor search and the KAM budget.
//!
//! Frequencies `ω ∈ ℝ^ν` are split into blocks of sizes `ν₁, …, ν_m`. A
//! lattice vector `k` belongs to block `i` when its first nonzero block is
//! the `i`-th one, and it is then tested against `γᵢ / |k|₁^τ`. The ℓ¹ norm
//! is used in every denominator.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// All `k ∈ ℤ^dim` with `|k|₁ = r`, in lexicographic order.
pub fn l1_shell(dim: usize, r: u32) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    let mut k = vec![0i64; dim];
    fill_shell(&mut k, 0, r as i64, &mut out);
    out
}

fn fill_shell(k: &mut Vec<i64>, pos: usize, left: i64, out: &mut Vec<Vec<i64>>) {
    if pos + 1 == k.len() {
        if left == 0 {
            k[pos] = 0;
            out.push(k.clone());
        } else {
            k[pos] = -left;
            out.push(k.clone());
            k[pos] = left;
            out.push(k.clone());
        }
        return;
    }
    for v in -left..=left {
        k[pos] = v;
        fill_shell(k, pos + 1, left - v.abs(), out);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DioFiltration {
    /// Block sizes `ν₁, …, ν_m`.
    pub nu_parts: Vec<usize>,
    /// `γ₁ ≥ … ≥ γ_m > 0`.
    pub gammas: Vec<f64>,
    pub tau: f64,
    /// Largest `|k|₁` tested.
    pub cutoff: u32,
}

impl DioFiltration {
    pub fn new(nu_parts: Vec<usize>, gammas: Vec<f64>, tau: f64, cutoff: u32) -> Result<Self> {
        if nu_parts.is_empty() || nu_parts.contains(&0) {
            return Err(Error::domain("block sizes must be positive"));
        }
        if gammas.len() != nu_parts.len() {
            return Err(Error::Dimension {
                expected: nu_parts.len(),
                got: gammas.len(),
            });
        }
        if gammas.iter().any(|g| !(*g > 0.0) || !g.is_finite()) || gammas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::domain("scales must be positive and non-increasing"));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::domain("exponent must be non-negative"));
        }
        if cutoff < 1 {
            return Err(Error::domain("cutoff must be at least 1"));
        }
        Ok(Self {
            nu_parts,
            gammas,
            tau,
            cutoff,
        })
    }

    /// The classical single-scale set.
    pub fn single(nu: usize, gamma: f64, tau: f64, cutoff: u32) -> Result<Self> {
        Self::new(vec![nu], vec![gamma], tau, cutoff)
    }

    pub fn nu(&self) -> usize {
        self.nu_parts.iter().sum()
    }

    /// Index of the first block where `k` is nonzero.
    pub fn block_of(&self, k: &[i64]) -> Option<usize> {
        let mut start = 0;
        for (b, &len) in self.nu_parts.iter().enumerate() {
            if k[start..start + len].iter().any(|&c| c != 0) {
                return Some(b);
            }
            start += len;
        }
        None
    }

    pub fn with_gammas(&self, gammas: Vec<f64>) -> Result<Self> {
        Self::new(self.nu_parts.clone(), gammas, self.tau, self.cutoff)
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Result<Self> {
        Self::new(self.nu_parts.clone(), self.gammas.clone(), self.tau, cutoff)
    }
}

/// One lattice vector to test, with its block and `|k|₁^τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    pub k: Vec<i64>,
    pub block: usize,
    pub weight: f64,
}

/// The lattice vectors of a filtration in test order: blocks outermost,
/// `|k|₁` shells inside, lexicographic within a shell. Of `±k` only the one
/// whose first nonzero entry is positive is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorTable {
    pub filtration: DioFiltration,
    pub divisors: Vec<Divisor>,
}

impl DivisorTable {
    pub fn new(filt: &DioFiltration) -> Self {
        let nu = filt.nu();
        let mut divisors = Vec::new();
        let mut start = 0;
        for (b, &len) in filt.nu_parts.iter().enumerate() {
            for r in 1..=filt.cutoff {
                for tail in l1_shell(nu - start, r) {
                    if tail[..len].iter().all(|&c| c == 0) {
                        continue;
                    }
                    let lead = tail.iter().find(|&&c| c != 0).copied().unwrap_or(0);
                    if lead < 0 {
                        continue;
                    }
                    let mut k = vec![0i64; start];
                    k.extend(tail);
                    divisors.push(Divisor {
                        k,
                        block: b,
                        weight: (r as f64).powf(filt.tau),
                    });
                }
            }
            start += len;
        }
        Self {
            filtration: filt.clone(),
            divisors,
        }
    }

    /// Test `omega` against every divisor.
    pub fn check(&self, omega: &[f64]) -> Result<DioReport> {
        let nu = self.filtration.nu();
        if omega.len() != nu {
            return Err(Error::Dimension {
                expected: nu,
                got: omega.len(),
            });
        }
        let mut worst: Option<(usize, f64, f64)> = None;
        for (idx, d) in self.divisors.iter().enumerate() {
            let dot = d.k.iter().zip(omega).map(|(&c, w)| c as f64 * w).sum::<f64>().abs();
            let required = self.filtration.gammas[d.block] / d.weight;
            let ratio = dot / required;
            if worst.is_none_or(|(_, _, r)| ratio < r) {
                worst = Some((idx, dot, ratio));
            }
        }
        let (idx, divisor, ratio) = worst.expect("cutoff ≥ 1 gives at least one divisor");
        let d = &self.divisors[idx];
        Ok(DioReport {
            member: ratio >= 1.0,
            k: d.k.clone(),
            block: d.block,
            divisor,
            required: self.filtration.gammas[d.block] / d.weight,
            ratio,
        })
    }

    /// Membership only, stopping at the first failure.
    pub fn is_member(&self, omega: &[f64]) -> bool {
        self.divisors.iter().all(|d| {
            let dot = d.k.iter().zip(omega).map(|(&c, w)| c as f64 * w).sum::<f64>().abs();
            dot * d.weight >= self.filtration.gammas[d.block]
        })
    }
}

/// Verdict and the tightest small divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct DioReport {
    pub member: bool,
    pub k: Vec<i64>,
    pub block: usize,
    /// `|ω·k|`.
    pub divisor: f64,
    /// `γ_block / |k|₁^τ`.
    pub required: f64,
    /// `divisor / required`; membership iff at least one.
    pub ratio: f64,
}

pub fn dio_membership(omega: &[f64], filt: &DioFiltration) -> Result<DioReport> {
    DivisorTable::new(filt).check(omega)
}

/// Monte Carlo estimate of the density of a Diophantine set in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub members: usize,
    pub samples: usize,
    pub density: f64,
    /// Wilson score interval at 95%.
    pub ci: (f64, f64),
    pub seed: u64,
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / (1.0 + z2 / nf);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Uniform samples in a box, reproducible from `seed`.
pub fn sample_box(bounds: &[(f64, f64)], samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if bounds.iter().any(|(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::domain("box must be nondegenerate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..samples)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect())
        .collect())
}

pub fn dio_measure(bounds: &[(f64, f64)], filt: &DioFiltration, samples: usize, seed: u64) -> Result<MeasureReport> {
    if bounds.len() != filt.nu() {
        return Err(Error::Dimension {
            expected: filt.nu(),
            got: bounds.len(),
        });
    }
    let table = DivisorTable::new(filt);
    let points = sample_box(bounds, samples, seed)?;
    Ok(measure_points(&table, &points, seed))
}

/// Density over given points; the lab crate uses this to split work.
pub fn measure_points(table: &DivisorTable, points: &[Vec<f64>], seed: u64) -> MeasureReport {
    let members = points.iter().filter(|p| table.is_member(p)).count();
    measure_report(members, points.len(), seed)
}

pub fn measure_report(members: usize, samples: usize, seed: u64) -> MeasureReport {
    MeasureReport {
        members,
        samples,
        density: if samples == 0 { 0.0 } else { members as f64 / samples as f64 },
        ci: wilson_interval(members, samples, Z95),
        seed,
    }
}

/// `max{1, log a}`.
pub fn log_plus(a: f64) -> f64 {
    a.ln().max(1.0)
}

/// Inputs of the KAM smallness condition.
#[derive(Debug, Clone, PartialEq)]
pub struct KamBudget {
    /// Bound on the frequency-map Hessian.
    pub m_norm: f64,
    /// Bounds on its block rows `M_k`, `k = 1..m`.
    pub m_blocks: Vec<f64>,
    /// Bound on the inverse Hessian.
    pub m_bar: f64,
    /// Bounds on the block rows of the inverse.
    pub m_bar_blocks: Vec<f64>,
    /// Perturbation size.
    pub e: f64,
    /// Overrides `max{M̄, 1/M_k}` when set.
    pub l: Option<f64>,
    pub s: f64,
    pub s_bar: f64,
    pub rho: f64,
    pub tau_star: f64,
    pub gammas: Vec<f64>,
    /// Unknown absolute constant of the condition.
    pub c_hat: f64,
}

/// Order-of-magnitude guesses `E = μE₀ e^{−K̄s}`, `L = L₀/μ`, `ρ̂ = ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleHeuristic {
    pub mu: f64,
    pub e0: f64,
    pub l0: f64,
    pub k_bar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KamReport {
    pub k: f64,
    pub l: f64,
    pub rho_hat_blocks: Vec<f64>,
    pub rho_hat: f64,
    pub e_hat: f64,
    /// `ĉ Ê`; the condition holds when this is below one.
    pub condition: f64,
    pub passes: bool,
    /// `ĉ Ê` with the heuristic `E`, `L` and `ρ̂ = ρ`, when requested.
    pub heuristic_condition: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!("{name} must be positive, got {v}")))
    }
}

pub fn kam_budget(b: &KamBudget, heuristic: Option<&ScaleHeuristic>) -> Result<KamReport> {
    let m = b.gammas.len();
    if m == 0 || b.m_blocks.len() != m || b.m_bar_blocks.len() != m {
        return Err(Error::domain("one scale and one block bound per block required"));
    }
    for (name, v) in [
        ("M", b.m_norm),
        ("M̄", b.m_bar),
        ("E", b.e),
        ("s", b.s),
        ("s̄", b.s_bar),
        ("ρ", b.rho),
        ("τ*", b.tau_star),
        ("ĉ", b.c_hat),
    ] {
        positive(name, v)?;
    }
    for v in b.m_blocks.iter().chain(&b.m_bar_blocks).chain(&b.gammas) {
        positive("block bound", *v)?;
    }
    if let Some(l) = b.l {
        positive("L", l)?;
    }
    if !(4.0 * b.s <= b.s_bar && b.s_bar < 1.0) {
        return Err(Error::domain("need 0 < 4s ≤ s̄ < 1"));
    }
    let l = b
        .l
        .unwrap_or_else(|| b.m_blocks.iter().fold(b.m_bar, |acc, mk| acc.max(1.0 / mk)));
    let m1 = b.m_blocks[0];
    let k = 6.0 / b.s * log_plus(b.gammas[0] * b.gammas[0] / (b.e * m1 * m1 * l));
    let rho_hat_blocks: Vec<f64> = b
        .gammas
        .iter()
        .zip(&b.m_blocks)
        .map(|(g, mk)| g / (3.0 * mk * k.powf(b.tau_star + 1.0)))
        .collect();
    let rho_hat = rho_hat_blocks.iter().fold(b.rho, |acc, r| acc.min(*r));
    let e_hat = b.e * l / (rho_hat * rho_hat);
    let condition = b.c_hat * e_hat;
    let heuristic_condition = heuristic.map(|h| {
        let e = h.mu * h.e0 * (-h.k_bar * b.s).exp();
        let l = h.l0 / h.mu;
        b.c_hat * e * l / (b.rho * b.rho)
    });
    Ok(KamReport {
        k,
        l,
        rho_hat_blocks,
        rho_hat,
        e_hat,
        condition,
        passes: condition < 1.0,
        heuristic_condition,
    })
}
