//! Chart round trips and symplecticity.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use planetlab_core::charts::symplectic::symplecticity_defect;
use planetlab_core::charts::{Chart, DelaunayChart, PStarChart, PoincareChart};
use planetlab_core::geometry::{circ_dist, e3};
use planetlab_core::{EllipseElements, Error};

use super::Context;
use crate::report::{num, Assertion, Outcome, Table};
use crate::sampling::{elements, elements_about, state, stream};

const ROUND_TRIP_TOL: f64 = 1e-9;
const SYMPLECTIC_TOL: f64 = 1e-6;
/// Draws per sample before giving up on landing inside a chart.
const MAX_ATTEMPTS: usize = 1000;
/// Poincaré variables need prograde orbits.
const POINCARE_MAX_TILT: f64 = 1.4;

fn outside_domain(e: &Error) -> bool {
    matches!(e, Error::ChartSingular { .. } | Error::VanishingNode { .. })
}

fn flat_distance(a: &[f64], b: &[f64], mask: &[bool], scale: f64) -> f64 {
    a.iter()
        .zip(b)
        .zip(mask)
        .map(|((u, v), &ang)| if ang { circ_dist(*u, *v) } else { (u - v).abs() / scale })
        .fold(0.0, f64::max)
}

/// First draw that lands in the chart: `(attempts, flat coordinates)`.
fn draw_inside<C: Chart>(
    chart: &C,
    rng: &mut ChaCha8Rng,
    draw: &(dyn Fn(&mut ChaCha8Rng) -> Vec<EllipseElements> + Sync),
    ctx: &Context,
) -> anyhow::Result<Option<(usize, planetlab_core::CartesianState, C::Coords)>> {
    let masses = ctx.cfg.masses()?;
    for attempt in 1..=MAX_ATTEMPTS {
        let s = state(&draw(rng), &masses)?;
        match chart.from_cartesian(&s) {
            Ok(c) => return Ok(Some((attempt, s, c))),
            Err(e) if outside_domain(&e) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

type Draw<'a> = Box<dyn Fn(&mut ChaCha8Rng) -> Vec<EllipseElements> + Sync + 'a>;

struct Sampled<'a> {
    name: &'static str,
    tag: u64,
    draw: Draw<'a>,
}

fn samplers<'a>(ctx: &'a Context) -> Vec<Sampled<'a>> {
    let s = &ctx.cfg.sampling;
    let axes = ctx.cfg.axes();
    let (a1, a2, a3) = (axes.clone(), axes.clone(), axes);
    let e = s.e_min..s.e_max;
    let (e1, e2, e3r) = (e.clone(), e.clone(), e);
    let tilt = s.max_tilt;
    vec![
        Sampled {
            name: "delaunay",
            tag: 1,
            draw: Box::new(move |rng| elements(rng, &a1, e1.clone(), tilt)),
        },
        Sampled {
            name: "poincare",
            tag: 2,
            draw: Box::new(move |rng| elements_about(rng, e3(), &a2, e2.clone(), tilt.min(POINCARE_MAX_TILT))),
        },
        Sampled {
            name: "pstar",
            tag: 3,
            draw: Box::new(move |rng| elements(rng, &a3, e3r.clone(), tilt)),
        },
    ]
}

fn round_trip_rows<C: Chart + Sync>(
    chart: &C,
    sampler: &Sampled,
    ctx: &Context,
    table: &mut Table,
) -> anyhow::Result<(f64, usize)>
where
    C::Coords: Send,
{
    let count = ctx.cfg.sampling.count;
    let rows: Vec<anyhow::Result<Option<(usize, f64, f64)>>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(ctx.seed, sampler.tag, k as u64);
            let Some((attempts, s, coords)) = draw_inside(chart, &mut rng, &*sampler.draw, ctx)? else {
                return Ok(None);
            };
            let back = chart.to_cartesian(&coords)?;
            let flat = chart.flatten(&coords);
            let again = chart.flatten(&chart.from_cartesian(&back)?);
            let scale = flat[..chart.n()].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let coord_err = flat_distance(&flat, &again, &chart.angle_mask(), scale);
            Ok(Some((attempts, s.max_relative_difference(&back), coord_err)))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut missed = 0;
    for (k, r) in rows.into_iter().enumerate() {
        match r? {
            Some((attempts, se, ce)) => {
                worst = worst.max(se).max(ce);
                table.push(vec![sampler.name.into(), k.to_string(), attempts.to_string(), num(se), num(ce)]);
            }
            None => missed += 1,
        }
    }
    Ok((worst, missed))
}

pub fn round_trip(ctx: &Context) -> anyhow::Result<Outcome> {
    let masses = ctx.cfg.masses()?;
    let mut table = Table::new("round_trips", &["chart", "sample", "attempts", "state_error", "coordinate_error"]);
    let mut out = Outcome::default();
    for sampler in samplers(ctx) {
        let (worst, missed) = match sampler.name {
            "delaunay" => round_trip_rows(&DelaunayChart::new(masses.clone()), &sampler, ctx, &mut table)?,
            "poincare" => round_trip_rows(&PoincareChart::new(masses.clone()), &sampler, ctx, &mut table)?,
            _ => round_trip_rows(&PStarChart::new(masses.clone()), &sampler, ctx, &mut table)?,
        };
        let mut a = Assertion::below(format!("chart_atlas.round_trip[{}]", sampler.name), worst, ROUND_TRIP_TOL);
        if missed > 0 {
            a.pass = false;
            a.detail.push_str(&format!(", {missed} samples never landed in the chart"));
        }
        out.assertions.push(a);
    }
    out.tables.push(table);
    Ok(out)
}

fn defect_rows<C: Chart + Sync>(
    chart: &C,
    sampler_chart: &C,
    sampler: &Sampled,
    ctx: &Context,
    table: &mut Table,
) -> anyhow::Result<(f64, usize)>
where
    C::Coords: Send,
{
    let count = ctx.cfg.sampling.count;
    let rows: Vec<anyhow::Result<Option<f64>>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(ctx.seed, sampler.tag, k as u64);
            let Some((_, _, coords)) = draw_inside(sampler_chart, &mut rng, &*sampler.draw, ctx)? else {
                return Ok(None);
            };
            Ok(Some(symplecticity_defect(chart, &sampler_chart.flatten(&coords))?))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut missed = 0;
    for (k, r) in rows.into_iter().enumerate() {
        match r? {
            Some(d) => {
                worst = worst.max(d);
                table.push(vec![sampler.name.into(), k.to_string(), num(d)]);
            }
            None => missed += 1,
        }
    }
    Ok((worst, missed))
}

pub fn symplecticity(ctx: &Context) -> anyhow::Result<Outcome> {
    let masses = ctx.cfg.masses()?;
    let mut table = Table::new("symplecticity", &["chart", "sample", "defect"]);
    let mut out = Outcome::default();
    for sampler in samplers(ctx) {
        let (worst, missed) = match sampler.name {
            "delaunay" => {
                let c = DelaunayChart::new(masses.clone());
                defect_rows(&c, &c, &sampler, ctx, &mut table)?
            }
            "poincare" => {
                let c = PoincareChart::new(masses.clone());
                defect_rows(&c, &c, &sampler, ctx, &mut table)?
            }
            _ => {
                // Sample away from the node and eccentricity guards, where
                // finite differences lose accuracy.
                let c = PStarChart::new(masses.clone());
                let inner = PStarChart::new(masses.clone()).with_guards(0.05, 0.1);
                defect_rows(&c, &inner, &sampler, ctx, &mut table)?
            }
        };
        let mut a = Assertion::below(format!("chart_atlas.symplectic[{}]", sampler.name), worst, SYMPLECTIC_TOL);
        if missed > 0 {
            a.pass = false;
            a.detail.push_str(&format!(", {missed} samples never landed in the chart"));
        }
        out.assertions.push(a);
    }
    out.tables.push(table);
    Ok(out)
}
