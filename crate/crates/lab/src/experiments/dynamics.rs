//! Long integrations and their conserved quantities.

use std::f64::consts::TAU;

use planetlab_core::charts::{Chart, PStarChart};
use planetlab_core::dynamics::{integrate as run, pstar_integral_drift, IntegratorSpec, Method};
use planetlab_core::PlanetarySystem;

use super::Context;
use crate::report::{num, opt, Assertion, Outcome, Table};
use crate::sampling::state;

const MOMENTUM_TOL: f64 = 1e-11;
const REDUCED_TOL: f64 = 1e-8;

pub fn integrate(ctx: &Context) -> anyhow::Result<Outcome> {
    let cfg = ctx.cfg;
    let it = &cfg.integrator;
    let masses = cfg.masses()?;
    let n = masses.n();
    let els = cfg.elements();
    let s0 = state(&els, &masses)?;
    let mut system = PlanetarySystem::new(masses.clone());
    if let Some(r) = it.collision_radius {
        system = system.with_collision_radius(r);
    }
    let method = Method::parse(&it.method).expect("validated with the config");
    let period = TAU / masses.mean_motion(0, els[0].a);
    let spec = IntegratorSpec::new(period / it.steps_per_period, method).with_stride(it.stride);
    let traj = run(&system, &s0, it.periods * period, &spec)?;

    let mut header = vec!["t".to_string()];
    for block in ["y", "x"] {
        for i in 0..n {
            for c in ["x", "y", "z"] {
                header.push(format!("{block}{i}_{c}"));
            }
        }
    }
    let mut trajectory = Table {
        name: "trajectory".into(),
        header,
        rows: Vec::new(),
    };
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![num(*t)];
        row.extend(s.to_flat().into_iter().map(num));
        trajectory.rows.push(row);
    }

    let chart = PStarChart::new(masses);
    let energies = traj.energy_errors()?;
    let mut diagnostics = Table::new(
        "diagnostics",
        &["t", "energy_error", "c_x", "c_y", "c_z", "theta0", "vartheta0", "chi0", "kappa0"],
    );
    for ((t, s), de) in traj.times.iter().zip(&traj.states).zip(&energies) {
        let c = s.total_angular_momentum();
        let reduced = chart.from_cartesian(s).ok();
        let pick = |f: &dyn Fn(&planetlab_core::charts::PStarCoords) -> f64| reduced.as_ref().map(f);
        diagnostics.push(vec![
            num(*t),
            num(*de),
            num(c.x),
            num(c.y),
            num(c.z),
            opt(pick(&|p| p.theta[0])),
            opt(pick(&|p| p.vartheta[0])),
            opt(pick(&|p| p.chi[0])),
            opt(pick(&|p| p.kappa[0])),
        ]);
    }

    let mut out = Outcome::default();
    out.assertions.push(match &traj.truncated {
        None => Assertion::check("dynamics.completed", true, format!("{} samples", traj.len())),
        Some(e) => Assertion::check("dynamics.completed", false, format!("stopped at t = {}: {e}", num(traj.times[traj.len() - 1]))),
    });
    out.assertions.push(Assertion::below("dynamics.energy_drift", traj.energy_drift()?, it.energy_tol));
    out.assertions.push(Assertion::below(
        "dynamics.angular_momentum_drift",
        traj.angular_momentum_relative_drift(),
        MOMENTUM_TOL,
    ));
    match pstar_integral_drift(&traj, &chart) {
        Ok(drift) => {
            let (t, v, c) = drift.relative();
            for (name, value) in [("theta0", t), ("vartheta0", v), ("chi0", c)] {
                out.assertions.push(Assertion::below(format!("dynamics.reduced_integral[{name}]"), value, REDUCED_TOL));
            }
            if let Some((i, e)) = &drift.exit {
                out.assertions.push(Assertion::check(
                    "dynamics.stays_in_reduced_chart",
                    false,
                    format!("left at sample {i}: {e}"),
                ));
            }
            let (slope, _) = traj.energy_trend()?;
            out.tables.push(Table {
                name: "drift".into(),
                header: ["quantity", "value"].iter().map(|s| s.to_string()).collect(),
                rows: vec![
                    vec!["theta0_relative".into(), num(t)],
                    vec!["vartheta0_radians".into(), num(v)],
                    vec!["chi0_relative".into(), num(c)],
                    vec!["kappa0_rate".into(), num(drift.kappa0_rate)],
                    vec!["energy_trend".into(), num(slope)],
                    vec!["step".into(), num(traj.step)],
                    vec!["method".into(), traj.method.id().into()],
                ],
            });
        }
        Err(e) => out.assertions.push(Assertion::check(
            "dynamics.stays_in_reduced_chart",
            false,
            format!("initial state: {e}"),
        )),
    }
    out.tables.insert(0, trajectory);
    out.tables.insert(1, diagnostics);
    Ok(out)
}
