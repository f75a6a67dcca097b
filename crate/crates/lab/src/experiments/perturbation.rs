//! Averaged perturbation: parities, Kepler-map identities, dependence
//! probes and the quadrupole phase portrait.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use planetlab_core::charts::symmetry::{dalembert_parity_test, PARITY_PATTERNS};
use planetlab_core::charts::{PStarChart, PStarCoord, PStarCoords, PoincareChart, SecularZ};
use planetlab_core::secular::{
    dependence_probe, indirect_average, kepler_averages, pair_average, poincare_average, probe_grid,
    quadrupole_phase_portrait, Order, QuadratureSpec, SecularTerm, MAX_AXIS_RATIO,
};
use planetlab_core::SystemMasses;

use super::Context;
use crate::report::{num, opt, Assertion, Outcome, Table};
use crate::sampling::{elements, ellipse, stream, unit};
use crate::svg;

const PARITY_TOL: f64 = 1e-8;
const KEPLER_TOL: f64 = 1e-10;
const EXCLUDED_TOL: f64 = 1e-10;
/// Probe points that must land inside the chart before a window stops shrinking.
const MIN_INSIDE: usize = 24;
const CONTROL_FLOOR: f64 = 1e-4;
const SYMMETRY_TOL: f64 = 1e-10;
/// Size of the random `z` samples relative to `√Λᵢ`.
const Z_SCALE: f64 = 0.15;
/// Samples per parallel chunk of the parity test.
const CHUNK: usize = 25;

fn lambdas(masses: &SystemMasses, axes: &[f64]) -> Vec<f64> {
    axes.iter().enumerate().map(|(i, a)| masses.lambda_from_axis(i, *a)).collect()
}

fn pattern_name(p: &[f64; 4]) -> String {
    let names = ["eta", "xi", "p", "q"];
    let parts: Vec<String> = p
        .iter()
        .zip(names)
        .map(|(s, n)| if *s > 0.0 { n.to_string() } else { format!("-{n}") })
        .collect();
    parts.join(",")
}

pub fn dalembert(ctx: &Context) -> anyhow::Result<Outcome> {
    let masses = ctx.cfg.masses()?;
    let n = masses.n();
    if n < 2 {
        return Err(ctx.config_error("system", "n", "parities need at least two planets"));
    }
    let chart = PoincareChart::new(masses.clone());
    let lambda = lambdas(&masses, &ctx.cfg.axes());
    let spec = ctx.cfg.quadrature_spec()?;
    let count = ctx.cfg.sampling.count;
    let samples: Vec<SecularZ> = (0..count)
        .map(|k| {
            let mut rng = stream(ctx.seed, 10, k as u64);
            let flat: Vec<f64> = (0..4 * n)
                .map(|i| Z_SCALE * lambda[i % n].sqrt() * rng.random_range(-1.0..1.0))
                .collect();
            SecularZ::from_flat(&flat).expect("length is a multiple of four")
        })
        .collect();
    let angles = [0.4, 2.5];
    let reports: Vec<_> = samples
        .par_chunks(CHUNK)
        .map(|chunk| dalembert_parity_test(|z| poincare_average(&chart, &lambda, z, &spec), chunk, &angles, 1e-4))
        .collect::<Result<_, _>>()?;
    let mut parity = [0.0f64; 3];
    let mut rotation = 0.0f64;
    for r in &reports {
        for (p, d) in parity.iter_mut().zip(r.parity_defects) {
            *p = p.max(d);
        }
        rotation = rotation.max(r.rotation_defect);
    }
    let first = &reports[0];
    let mut table = Table::new("dalembert", &["quantity", "value"]);
    let mut out = Outcome::default();
    for (p, d) in PARITY_PATTERNS.iter().zip(parity) {
        let name = pattern_name(p);
        table.push(vec![format!("parity[{name}]"), num(d)]);
        out.assertions.push(Assertion::below(format!("chart_atlas.averaged_parity[{name}]"), d, PARITY_TOL));
    }
    table.push(vec!["rotation".into(), num(rotation)]);
    table.push(vec!["gradient_at_origin".into(), num(first.equilibrium_gradient)]);
    table.push(vec!["value_at_origin".into(), num(first.value_at_origin)]);
    table.push(vec!["samples".into(), count.to_string()]);
    out.assertions.push(Assertion::below("chart_atlas.averaged_rotation_invariance", rotation, PARITY_TOL));
    out.assertions.push(Assertion::below(
        "secular_engine.elliptic_equilibrium_gradient",
        first.equilibrium_gradient,
        PARITY_TOL,
    ));
    out.tables.push(table);
    Ok(out)
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn identities(ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg = ctx.cfg;
    let masses = cfg.masses()?;
    let sm = &cfg.sampling;
    let count = sm.count;
    let mut out = Outcome::default();

    // single-ellipse averages; high eccentricities need many nodes
    let one = SystemMasses::new(masses.m0(), masses.mu(), vec![masses.planet(0)])?;
    let kspec = QuadratureSpec::new(cfg.quadrature.nodes, 1e-13, cfg.quadrature.max_nodes.max(8192))?;
    let e_hi = sm.e_max.min(0.9);
    let rows: Vec<anyhow::Result<[f64; 6]>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(ctx.seed, 20, k as u64);
            let e = rng.random_range(0.0..=e_hi);
            let a = rng.random_range(0.5..5.0);
            let normal = unit(&mut rng);
            let el = ellipse(&mut rng, a, e, normal);
            let av = kepler_averages(&el, &one, 0, &kspec)?;
            let y_scale = one.reduced(0) * one.mean_motion(0, a) * a;
            Ok([
                a,
                e,
                (av.inverse_distance * a - 1.0).abs(),
                av.momentum.norm() / y_scale,
                av.force.norm() * a * a,
                av.nodes as f64,
            ])
        })
        .collect();
    let mut kepler = Table::new(
        "kepler_averages",
        &["sample", "a", "e", "inverse_distance_error", "momentum_error", "force_error", "nodes"],
    );
    let mut worst = [0.0f64; 3];
    for (k, r) in rows.into_iter().enumerate() {
        let r = r?;
        for (w, v) in worst.iter_mut().zip(&r[2..5]) {
            *w = w.max(*v);
        }
        kepler.push(vec![
            k.to_string(),
            num(r[0]),
            num(r[1]),
            num(r[2]),
            num(r[3]),
            num(r[4]),
            (r[5] as usize).to_string(),
        ]);
    }
    for (name, w) in ["inverse_distance", "momentum", "force"].iter().zip(worst) {
        out.assertions.push(Assertion::below(format!("secular_engine.kepler_average[{name}]"), w, KEPLER_TOL));
    }
    out.tables.push(kepler);

    // indirect part over random systems on the configured axes
    let spec = cfg.quadrature_spec()?;
    let axes = cfg.axes();
    let n = masses.n();
    if n >= 2 {
        let systems = (count / 10).max(1);
        let vals: Vec<anyhow::Result<f64>> = (0..systems)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(ctx.seed, 21, k as u64);
                let els = elements(&mut rng, &axes, sm.e_min..sm.e_max.min(0.7), sm.max_tilt);
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in i + 1..n {
                        worst = worst.max(indirect_average(&els, &masses, (i, j), &spec)?.abs());
                    }
                }
                Ok(worst)
            })
            .collect();
        let mut indirect = 0.0f64;
        for v in vals {
            indirect = indirect.max(v?);
        }
        out.assertions.push(Assertion::below("secular_engine.indirect_average_vanishes", indirect, spec.tol));
    }

    // remainder of the order expansion, on the two innermost configured orbits
    if n < 2 {
        return Err(ctx.config_error("system", "n", "the order expansion needs two planets"));
    }
    let pair_masses = SystemMasses::new(masses.m0(), masses.mu(), (0..2).map(|i| masses.planet(i)).collect())?;
    let fine = QuadratureSpec::new(cfg.quadrature.nodes, 1e-15, cfg.quadrature.max_nodes)?;
    let base: Vec<_> = cfg.elements()[..2].to_vec();
    let mut orders = Table::new("order_remainder", &["alpha", "full", "orders_0_to_4", "remainder"]);
    let mut pts = Vec::new();
    for alpha in [0.05, 0.1, 0.2] {
        let mut els = base.clone();
        els[0].a = alpha;
        els[1].a = 1.0;
        let full = pair_average(&els, &pair_masses, (0, 1), Order::Full, &fine)?.value;
        let mut partial = 0.0;
        for k in 0..=4 {
            partial += pair_average(&els, &pair_masses, (0, 1), Order::Legendre(k), &fine)?.value;
        }
        let rem = (full - partial).abs();
        orders.push(vec![num(alpha), num(full), num(partial), num(rem)]);
        pts.push((alpha.ln(), rem.ln()));
    }
    out.assertions.push(Assertion::near("secular_engine.order_remainder_slope", fit_slope(&pts), 5.0, 0.5));
    out.tables.push(orders);
    Ok(out)
}

fn reduced_base(ctx: &Context, chart: &PStarChart) -> anyhow::Result<PStarCoords> {
    chart
        .coords_from_elements(&ctx.cfg.elements())
        .map_err(|e| ctx.config_error("system", ctx.axes_key(), format!("system is outside the reduced chart: {e}")))
}

/// 32 points within `±half` of the base value.
fn window(base: &PStarCoords, coord: PStarCoord, half: f64) -> Vec<f64> {
    let v = base.get(coord);
    (0..32).map(|k| v - half + 2.0 * half * k as f64 / 31.0).collect()
}

fn order_name(o: Order) -> String {
    match o {
        Order::Full => "full".into(),
        Order::Legendre(k) => format!("order{k}"),
    }
}

pub fn integrability(ctx: &Context) -> anyhow::Result<Outcome> {
    let masses = ctx.cfg.masses()?;
    let n = masses.n();
    if n < 2 {
        return Err(ctx.config_error("system", "n", "dependence probes need at least two planets"));
    }
    let chart = PStarChart::new(masses);
    let base = reduced_base(ctx, &chart)?;
    let spec = ctx.cfg.quadrature_spec()?;
    let axes = ctx.cfg.axes();
    let mut jobs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for order in [Order::Full, Order::Legendre(2)] {
                if order != Order::Full && axes[i] / axes[j] >= MAX_AXIS_RATIO {
                    continue;
                }
                let term = SecularTerm::new((i, j), order).with_spec(spec);
                let listed = term.dependence_set(n);
                for coord in PStarCoord::all(n) {
                    jobs.push((term.clone(), coord, listed.contains(&coord)));
                }
            }
        }
    }
    let probes: Vec<_> = jobs
        .par_iter()
        .map(|(term, coord, _)| {
            let mut half = if coord.is_angle() { 0.05 } else { 0.02 * base.get(*coord).abs() };
            // coordinates near a chart bound get a narrower window
            loop {
                let p = dependence_probe(|c| term.evaluate(&chart, c), &base, *coord, &window(&base, *coord, half))?;
                if p.evaluated >= MIN_INSIDE || half < 1e-6 * base.get(*coord).abs().max(1.0) {
                    return Ok((p, half));
                }
                half /= 4.0;
            }
        })
        .collect::<planetlab_core::Result<_>>()?;
    let mut table = Table::new("dependence", &["pair", "order", "coordinate", "listed", "half_width", "evaluated", "variation"]);
    let mut out = Outcome::default();
    let mut excluded_worst = std::collections::BTreeMap::new();
    for ((term, coord, listed), (probe, half)) in jobs.iter().zip(&probes) {
        let key = format!("{}-{},{}", term.pair.0, term.pair.1, order_name(term.order));
        table.push(vec![
            format!("{}-{}", term.pair.0, term.pair.1),
            order_name(term.order),
            coord.to_string(),
            listed.to_string(),
            num(*half),
            probe.evaluated.to_string(),
            num(probe.max_variation),
        ]);
        if !listed {
            let e = excluded_worst.entry(key).or_insert((0.0f64, usize::MAX));
            e.0 = e.0.max(probe.max_variation);
            e.1 = e.1.min(probe.evaluated);
        }
    }
    for (key, (worst, evaluated)) in excluded_worst {
        let mut a = Assertion::below(format!("secular_engine.excluded_coordinates[{key}]"), worst, EXCLUDED_TOL);
        if evaluated < 8 {
            a.pass = false;
            a.detail.push_str(&format!(", only {evaluated} grid points inside the chart"));
        }
        out.assertions.push(a);
    }

    // the quadrupole of the outer pair over a full circle of the last κ
    let (i, j) = (n - 2, n - 1);
    if axes[i] / axes[j] < MAX_AXIS_RATIO {
        let term = SecularTerm::new((i, j), Order::Legendre(2)).with_spec(spec);
        let kappa = PStarCoord::Kappa(n - 1);
        let k = dependence_probe(|c| term.evaluate(&chart, c), &base, kappa, &probe_grid(kappa, &base, 32, 0.0))?;
        let vt = PStarCoord::Vartheta(n - 1);
        let v = dependence_probe(|c| term.evaluate(&chart, c), &base, vt, &window(&base, vt, 0.1))?;
        table.push(vec![
            format!("{i}-{j}"),
            "order2".into(),
            format!("{kappa} (circle)"),
            "false".into(),
            num(PI),
            k.evaluated.to_string(),
            num(k.max_variation),
        ]);
        let mut a = Assertion::below("secular_engine.quadrupole_ignores_last_kappa", k.max_variation, EXCLUDED_TOL);
        if k.evaluated != 32 {
            a.pass = false;
            a.detail.push_str(&format!(", only {} of 32 grid points inside the chart", k.evaluated));
        }
        out.assertions.push(a);
        out.assertions.push(Assertion::above("secular_engine.quadrupole_feels_last_vartheta", v.max_variation, CONTROL_FLOOR));
    }
    out.tables.push(table);
    Ok(out)
}

pub fn phase_portrait(ctx: &Context) -> anyhow::Result<Outcome> {
    let masses = ctx.cfg.masses()?;
    let n = masses.n();
    if n < 2 {
        return Err(ctx.config_error("system", "n", "the phase portrait needs at least two planets"));
    }
    let axes = ctx.cfg.axes();
    if axes[n - 2] / axes[n - 1] >= MAX_AXIS_RATIO {
        return Err(ctx.config_error(
            "system",
            ctx.axes_key(),
            format!("the outer pair needs an axis ratio below {MAX_AXIS_RATIO}"),
        ));
    }
    let chart = PStarChart::new(masses);
    let base = reduced_base(ctx, &chart)?
        .with(PStarCoord::Theta(n - 1), 0.0)
        .with(PStarCoord::Vartheta(n - 1), PI);
    let p = &ctx.cfg.portrait;
    let spec = ctx.cfg.quadrature_spec()?;
    let half = p.theta_fraction * base.chi[n - 1];
    let shape = (p.grid[0], p.grid[1]);
    let raster = quadrupole_phase_portrait(&chart, &base, half, p.vartheta_half_width, shape, &spec)?;
    let (nt, nv) = raster.shape();
    let mut table = Table::new("phase_portrait", &["theta", "vartheta", "value"]);
    for it in 0..nt {
        for iv in 0..nv {
            table.push(vec![num(raster.theta[it]), num(raster.vartheta[iv]), opt(raster.get(it, iv))]);
        }
    }
    let mut out = Outcome::default();
    let mut asym = 0.0f64;
    for it in 0..nt {
        for iv in 0..nv {
            if let (Some(a), Some(b)) = (raster.get(it, iv), raster.get(nt - 1 - it, nv - 1 - iv)) {
                asym = asym.max((a - b).abs());
            }
        }
    }
    out.assertions.push(Assertion::below("secular_engine.portrait_reflection_symmetry", asym, SYMMETRY_TOL));
    let centre_idx = (nt / 2, nv / 2);
    let centre = raster.get(centre_idx.0, centre_idx.1);
    let (mut rim_lo, mut rim_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for it in 0..nt {
        for iv in 0..nv {
            let Some(v) = raster.get(it, iv) else { continue };
            let on_rim = it == 0
                || iv == 0
                || it + 1 == nt
                || iv + 1 == nv
                || [(it - 1, iv), (it + 1, iv), (it, iv - 1), (it, iv + 1)]
                    .iter()
                    .any(|&(a, b)| raster.get(a, b).is_none());
            if on_rim {
                rim_lo = rim_lo.min(v);
                rim_hi = rim_hi.max(v);
            }
        }
    }
    let mut levels = Vec::new();
    match centre {
        Some(c) if rim_lo > c || rim_hi < c => {
            let edge = if rim_lo > c { rim_lo } else { rim_hi };
            for frac in &p.levels {
                let level = c + frac * (edge - c);
                levels.push(level);
                out.assertions.push(Assertion::check(
                    format!("secular_engine.closed_level[{frac}]"),
                    raster.encloses(centre_idx, level),
                    format!("level {} around the coplanar point", num(level)),
                ));
            }
        }
        _ => out.assertions.push(Assertion::check(
            "secular_engine.closed_level",
            false,
            "the coplanar point is not an extremum inside the grid",
        )),
    }
    out.figures.push((
        "phase_portrait".into(),
        svg::heatmap(
            "quadrupole of the outer pair",
            ("Θ (last)", "ϑ (last)"),
            &raster.theta,
            &raster.vartheta,
            &raster.values,
            &levels,
        ),
    ));
    out.tables.push(table);
    Ok(out)
}
