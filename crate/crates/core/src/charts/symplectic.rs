//! Finite-difference symplecticity check.
//!
//! Both sides use `Ω = [[0, I], [−I, 0]]`: momenta (or actions) in the
//! first half of the flat vector, conjugate positions (or angles) in the
//! second half.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::Chart;
use crate::{Error, Result};

pub const FD_RELATIVE_STEP: f64 = 1e-6;


/// Standard symplectic matrix of size `2d`.
pub fn omega(d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        m[(k, d + k)] = 1.0;
        m[(d + k, k)] = -1.0;
    }
    m
}

/// Central-difference Jacobian of the chart-to-Cartesian map at `flat`.
pub fn jacobian<C: Chart>(chart: &C, flat: &[f64]) -> Result<DMatrix<f64>> {
    let dim = flat.len();
    let n = chart.n();
    if dim != 6 * n {
        return Err(Error::Dimension {
            expected: 6 * n,
            got: dim,
        });
    }
    let mask = chart.angle_mask();
    let action_scale = flat[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-12);
    let eval = |p: &[f64]| -> Result<Vec<f64>> {
        let coords = chart.unflatten(p)?;
        Ok(chart.to_cartesian(&coords)?.to_flat())
    };
    // Fail early if the base point itself is outside the domain.
    eval(flat)?;
    let mut jac = DMatrix::zeros(dim, dim);
    let mut work = flat.to_vec();
    for k in 0..dim {
        let h = if mask[k] {
            FD_RELATIVE_STEP
        } else {
            FD_RELATIVE_STEP * flat[k].abs().max(action_scale)
        };
        // Central differences at h and 2h, each divided by the step actually
        // taken after rounding, combined by one Richardson step.
        let mut central = |step: f64| -> Result<Vec<f64>> {
            let (up, down) = (flat[k] + step, flat[k] - step);
            work[k] = up;
            let plus = eval(&work)?;
            work[k] = down;
            let minus = eval(&work)?;
            work[k] = flat[k];
            Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (up - down)).collect())
        };
        let fine = central(h)?;
        let coarse = central(2.0 * h)?;
        for r in 0..dim {
            jac[(r, k)] = (4.0 * fine[r] - coarse[r]) / 3.0;
        }
    }
    Ok(jac)
}

/// Max absolute entry of `JᵀΩJ − Ω` at one point.
pub fn symplecticity_defect<C: Chart>(chart: &C, flat: &[f64]) -> Result<f64> {
    let jac = jacobian(chart, flat)?;
    let om = omega(flat.len() / 2);
    let diff = jac.transpose() * &om * &jac - om;
    Ok(diff.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

#[derive(Debug, Clone)]
pub struct SymplecticReport {
    pub max_defect: f64,
    pub evaluated: usize,
    /// Points outside the chart domain, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

pub fn symplecticity_test<C: Chart>(chart: &C, points: &[Vec<f64>]) -> SymplecticReport {
    let mut report = SymplecticReport {
        max_defect: 0.0,
        evaluated: 0,
        skipped: Vec::new(),
    };
    for (idx, p) in points.iter().enumerate() {
        match symplecticity_defect(chart, p) {
            Ok(d) => {
                report.evaluated += 1;
                report.max_defect = report.max_defect.max(d);
            }
            Err(e) => report.skipped.push((idx, e)),
        }
    }
    report
}
