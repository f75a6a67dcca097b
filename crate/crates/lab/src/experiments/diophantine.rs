//! Multi-scale Diophantine sets and the KAM budget.

use rayon::prelude::*;

use planetlab_core::diophantine::{kam_budget, measure_report, sample_box, DivisorTable, KamBudget, ScaleHeuristic};

use super::Context;
use crate::report::{num, Assertion, Outcome, Table};
use crate::sampling::derived_seed;
use crate::svg::{self, Axes, Series};

pub fn measure(ctx: &Context) -> anyhow::Result<Outcome> {
    let d = &ctx.cfg.diophantine;
    let filt = ctx.cfg.filtration()?;
    let bounds: Vec<(f64, f64)> = d.bounds.iter().map(|[lo, hi]| (*lo, *hi)).collect();
    let seed = derived_seed(ctx.seed, 40);
    let points = sample_box(&bounds, d.samples, seed)?;
    let mut sweep = d.sweep.clone();
    if sweep.is_empty() {
        sweep.push(d.gammas[0]);
    }
    let mut table = Table::new("dio_measure", &["gamma", "members", "samples", "density", "ci_low", "ci_high"]);
    let mut curve = Vec::new();
    for &g in &sweep {
        // every scale moves with the first
        let gammas: Vec<f64> = d.gammas.iter().map(|x| x * g / d.gammas[0]).collect();
        let f = filt
            .with_gammas(gammas)
            .map_err(|e| ctx.config_error("diophantine", "sweep", format!("sweep value {g}: {e}")))?;
        let table_k = DivisorTable::new(&f);
        let members = points.par_iter().filter(|p| table_k.is_member(p)).count();
        let r = measure_report(members, points.len(), seed);
        table.push(vec![num(g), members.to_string(), points.len().to_string(), num(r.density), num(r.ci.0), num(r.ci.1)]);
        curve.push((g, r.density));
    }
    let mut out = Outcome::default();
    let mut by_gamma = curve.clone();
    by_gamma.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = by_gamma.windows(2).all(|w| w[1].1 <= w[0].1);
    out.assertions.push(Assertion::check(
        "diophantine.density_decreases_with_scale",
        monotone,
        format!("{} sweep values", curve.len()),
    ));
    let logs: Vec<(f64, f64)> = by_gamma
        .iter()
        .filter(|(_, dens)| *dens < 1.0)
        .map(|(g, dens)| (g.ln(), (1.0 - dens).ln()))
        .collect();
    if logs.len() >= 2 {
        let n = logs.len() as f64;
        let (mx, my) = (logs.iter().map(|p| p.0).sum::<f64>() / n, logs.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        out.assertions.push(Assertion::near("diophantine.complement_slope", slope, d.slope, d.slope_tol));
    }
    out.figures.push((
        "dio_measure".into(),
        svg::line_chart(
            "Diophantine density",
            ("first scale", "density"),
            &[Series {
                name: "density".into(),
                points: by_gamma,
            }],
            Axes { log_x: true, log_y: false },
        ),
    ));
    out.tables.push(table);
    Ok(out)
}

pub fn kam(ctx: &Context) -> anyhow::Result<Outcome> {
    let k = &ctx.cfg.kam;
    let budget = KamBudget {
        m_norm: k.m_norm,
        m_blocks: k.m_blocks.clone(),
        m_bar: k.m_bar,
        m_bar_blocks: k.m_bar_blocks.clone(),
        e: k.e,
        l: k.l,
        s: k.s,
        s_bar: k.s_bar,
        rho: k.rho,
        tau_star: k.tau_star,
        gammas: k.gammas.clone(),
        c_hat: k.c_hat,
    };
    let heuristic = k.heuristic.map(|[mu, e0, l0, k_bar]| ScaleHeuristic { mu, e0, l0, k_bar });
    let report = kam_budget(&budget, heuristic.as_ref()).map_err(|e| ctx.config_error("kam", "", e.to_string()))?;
    let mut table = Table::new("kam_budget", &["quantity", "value"]);
    table.push(vec!["K".into(), num(report.k)]);
    table.push(vec!["L".into(), num(report.l)]);
    for (i, r) in report.rho_hat_blocks.iter().enumerate() {
        table.push(vec![format!("rho_hat[{}]", i + 1), num(*r)]);
    }
    table.push(vec!["rho_hat".into(), num(report.rho_hat)]);
    table.push(vec!["E_hat".into(), num(report.e_hat)]);
    table.push(vec!["condition".into(), num(report.condition)]);
    if let Some(h) = report.heuristic_condition {
        table.push(vec!["heuristic_condition".into(), num(h)]);
    }
    let mut out = Outcome::default();
    let analyticity = report.rho_hat <= k.rho && report.rho_hat_blocks.iter().all(|r| report.rho_hat <= *r);
    out.assertions.push(Assertion::check(
        "diophantine.kam_radius_within_bounds",
        analyticity,
        format!("rho_hat {} with rho {}", num(report.rho_hat), num(k.rho)),
    ));
    out.assertions.push(Assertion::check(
        "diophantine.kam_cutoff_floor",
        report.k >= 6.0 / k.s,
        format!("K {} against 6/s = {}", num(report.k), num(6.0 / k.s)),
    ));
    if let Some(expect) = k.expect {
        out.assertions.push(Assertion::check(
            "diophantine.kam_condition",
            report.passes == expect,
            format!("c_hat E_hat = {} (expected {})", num(report.condition), if expect { "< 1" } else { "≥ 1" }),
        ));
    }
    out.tables.push(table);
    Ok(out)
}
