//! First-order Birkhoff invariants and the secular degeneracies.

use rayon::prelude::*;

use planetlab_core::birkhoff::{compute_invariants, nonresonance_probe, resonance_check, BirkhoffSpec};
use planetlab_core::SystemMasses;

use super::Context;
use crate::report::{num, Assertion, Outcome, Table};
use crate::sampling::{spaced_axes, stream};

const DEGENERACY_TOL: f64 = 1e-8;
/// Smallest admitted `|ω·k| / |ω|` for the nonresonance check.
const NONRESONANCE_FLOOR: f64 = 1e-8;
const DEFAULT_FACTORS: [f64; 4] = [1.0, 0.6, 1.3, 0.8];

fn spec(ctx: &Context) -> BirkhoffSpec {
    let b = &ctx.cfg.birkhoff;
    BirkhoffSpec {
        step: b.step,
        alpha_max: b.alpha_max,
        ..BirkhoffSpec::default()
    }
}

pub fn birkhoff(ctx: &Context) -> anyhow::Result<Outcome> {
    let masses = ctx.cfg.masses()?;
    let n = masses.n();
    if n < 2 {
        return Err(ctx.config_error("system", "n", "invariants need at least two planets"));
    }
    let axes = ctx.cfg.axes();
    let alpha_max = ctx.cfg.birkhoff.alpha_max;
    if let Some(w) = axes.windows(2).find(|w| w[0] / w[1] > alpha_max) {
        return Err(ctx.config_error(
            "system",
            ctx.axes_key(),
            format!("axis ratio {:.3} exceeds alpha_max = {alpha_max}", w[0] / w[1]),
        ));
    }
    let lambda: Vec<f64> = axes.iter().enumerate().map(|(i, a)| masses.lambda_from_axis(i, *a)).collect();
    let inv = compute_invariants(&lambda, &masses, &spec(ctx))?;
    let mut matrices = Table::new("birkhoff_matrices", &["block", "row", "column", "value"]);
    for (name, m) in [("horizontal", &inv.qh), ("vertical", &inv.qv)] {
        for r in 0..n {
            for c in 0..n {
                matrices.push(vec![name.into(), r.to_string(), c.to_string(), num(m[(r, c)])]);
            }
        }
    }
    let mut spectrum = Table::new("birkhoff_spectrum", &["kind", "index", "value"]);
    spectrum.push(vec!["c0".into(), "0".into(), num(inv.c0)]);
    spectrum.push(vec!["nodes".into(), "0".into(), inv.nodes.to_string()]);
    for (kind, v) in [("sigma", &inv.sigma), ("varsigma", &inv.varsigma)] {
        for (i, x) in v.iter().enumerate() {
            spectrum.push(vec![kind.into(), i.to_string(), num(*x)]);
        }
    }
    let check = resonance_check(&inv);
    let (v_rel, t_rel) = check.relative();
    let probe = nonresonance_probe(&inv, ctx.cfg.birkhoff.order)?;
    let omega = inv.reduced_frequencies();
    let size = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
    let k: Vec<String> = probe.k.iter().map(|c| c.to_string()).collect();
    spectrum.push(vec!["smallest_combination".into(), k.join(" "), num(probe.value)]);
    let mut out = Outcome::default();
    out.assertions.push(Assertion::below("birkhoff_invariants.vanishing_vertical_eigenvalue", v_rel, DEGENERACY_TOL));
    out.assertions.push(Assertion::below("birkhoff_invariants.vanishing_trace", t_rel, DEGENERACY_TOL));
    let mut a = Assertion::above(
        format!("birkhoff_invariants.nonresonance[order {}]", ctx.cfg.birkhoff.order),
        probe.value / size,
        NONRESONANCE_FLOOR,
    );
    a.detail.push_str(&format!(" at k = ({}) over {} vectors", k.join(", "), probe.searched));
    out.assertions.push(a);
    out.tables.push(matrices);
    out.tables.push(spectrum);
    Ok(out)
}

/// One random system in the resonance sweep.
struct Sample {
    axes: Vec<f64>,
    varsigma: f64,
    trace: f64,
    nodes: usize,
}

fn masses_for(ctx: &Context, n: usize) -> anyhow::Result<SystemMasses> {
    let s = &ctx.cfg.system;
    let factors = match &s.masses {
        Some(m) if m.len() >= n => m[..n].to_vec(),
        _ => DEFAULT_FACTORS[..n].to_vec(),
    };
    Ok(SystemMasses::new(s.m0, s.mu, factors)?)
}

pub fn resonances(ctx: &Context) -> anyhow::Result<Outcome> {
    let b = &ctx.cfg.birkhoff;
    let bspec = spec(ctx);
    let mut jobs = Vec::new();
    for &n in &b.n_values {
        for k in 0..b.count {
            jobs.push((n, k));
        }
    }
    let rows: Vec<anyhow::Result<Sample>> = jobs
        .par_iter()
        .map(|&(n, k)| {
            let masses = masses_for(ctx, n)?;
            let mut rng = stream(ctx.seed, 30 + n as u64, k as u64);
            let axes = spaced_axes(&mut rng, n, b.ratio_min..b.ratio_max);
            let lambda: Vec<f64> = axes.iter().enumerate().map(|(i, a)| masses.lambda_from_axis(i, *a)).collect();
            let inv = compute_invariants(&lambda, &masses, &bspec)?;
            let (varsigma, trace) = resonance_check(&inv).relative();
            Ok(Sample {
                axes,
                varsigma,
                trace,
                nodes: inv.nodes,
            })
        })
        .collect();
    let mut table = Table::new(
        "resonances",
        &["n", "sample", "a1", "a2", "a3", "a4", "nodes", "varsigma_relative", "trace_relative"],
    );
    let mut worst = std::collections::BTreeMap::new();
    for ((n, k), r) in jobs.iter().zip(rows) {
        let Sample {
            axes,
            varsigma: v,
            trace: t,
            nodes,
        } = r?;
        let mut row = vec![n.to_string(), k.to_string()];
        row.extend((0..4).map(|i| axes.get(i).map(|a| num(*a)).unwrap_or_default()));
        row.extend([nodes.to_string(), num(v), num(t)]);
        table.push(row);
        let w = worst.entry(*n).or_insert((0.0f64, 0.0f64));
        w.0 = w.0.max(v);
        w.1 = w.1.max(t);
    }
    let mut out = Outcome::default();
    for (n, (v, t)) in worst {
        out.assertions.push(Assertion::below(
            format!("birkhoff_invariants.vanishing_vertical_eigenvalue[n={n}]"),
            v,
            DEGENERACY_TOL,
        ));
        out.assertions.push(Assertion::below(format!("birkhoff_invariants.vanishing_trace[n={n}]"), t, DEGENERACY_TOL));
    }
    out.tables.push(table);
    Ok(out)
}
