//! Trajectories of the heliocentric equations and their conserved
//! quantities.
//!
//! The default method is the three-stage Gauss–Legendre collocation (order
//! six, symplectic), solved by fixed-point iteration. A second-order
//! splitting into Kepler flows, kicks and the momentum-coupling drift is
//! available as an alternative.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::charts::{Chart, PStarChart, PStarCoords};
use crate::geometry::{wrap_2pi, wrap_pi, Vec3};
use crate::system::{CartesianState, PlanetarySystem};
use crate::two_body::{cartesian_to_elements, elements_to_cartesian};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Three-stage Gauss–Legendre collocation.
    Gauss6,
    /// Strang splitting: kick, drift, Kepler, drift, kick.
    KeplerSplit,
}

impl Method {
    pub fn id(self) -> &'static str {
        match self {
            Method::Gauss6 => "gauss6",
            Method::KeplerSplit => "kepler-split",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gauss6" => Some(Method::Gauss6),
            "kepler-split" => Some(Method::KeplerSplit),
            _ => None,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Method::Gauss6 => 6,
            Method::KeplerSplit => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_SOLVE_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    /// Nominal step; the actual step divides the span evenly.
    pub dt: f64,
    pub method: Method,
    /// Steps between stored samples.
    pub stride: usize,
    /// Relative tolerance of the stage equations.
    pub solve_tol: f64,
    pub max_iterations: usize,
}

impl IntegratorSpec {
    pub fn new(dt: f64, method: Method) -> Self {
        Self {
            dt,
            method,
            stride: DEFAULT_STRIDE,
            solve_tol: DEFAULT_SOLVE_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }
}

/// Sampled solution. Diagnostics are recomputed from `states` on request.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: PlanetarySystem,
    pub times: Vec<f64>,
    pub states: Vec<CartesianState>,
    /// Step actually used (negative for backward integration).
    pub step: f64,
    pub method: Method,
    /// Set when the collision guard stopped the run early.
    pub truncated: Option<Error>,
}

const SQRT15: f64 = 3.872_983_346_207_417;

const GAUSS_A: [[f64; 3]; 3] = [
    [5.0 / 36.0, 2.0 / 9.0 - SQRT15 / 15.0, 5.0 / 36.0 - SQRT15 / 30.0],
    [5.0 / 36.0 + SQRT15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQRT15 / 24.0],
    [5.0 / 36.0 + SQRT15 / 30.0, 2.0 / 9.0 + SQRT15 / 15.0, 5.0 / 36.0],
];
const GAUSS_B: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
const GAUSS_C: [f64; 3] = [0.5 - SQRT15 / 10.0, 0.5, 0.5 + SQRT15 / 10.0];

/// Hamiltonian vector field on the flat layout `(y, x)`.
struct Field<'a> {
    system: &'a PlanetarySystem,
    n: usize,
    reduced: Vec<f64>,
    central: Vec<f64>,
}

impl<'a> Field<'a> {
    fn new(system: &'a PlanetarySystem) -> Self {
        let m = &system.masses;
        let n = m.n();
        Self {
            system,
            n,
            reduced: (0..n).map(|i| m.reduced(i)).collect(),
            central: (0..n).map(|i| m.central(i)).collect(),
        }
    }

    fn eval(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let m = &self.system.masses;
        let mu = m.mu();
        let v3 = |s: &[f64], k: usize| Vec3::new(s[3 * k], s[3 * k + 1], s[3 * k + 2]);
        let y_sum: Vec3 = (0..n).map(|i| v3(u, i)).sum();
        let (ydot, xdot) = out.split_at_mut(3 * n);
        for i in 0..n {
            let yi = v3(u, i);
            let dx = yi / self.reduced[i] + (y_sum - yi) * (mu / m.m0());
            xdot[3 * i..3 * i + 3].copy_from_slice(dx.as_slice());
            let xi = v3(u, n + i);
            let r = xi.norm();
            let dy = xi * (-self.reduced[i] * self.central[i] / (r * r * r));
            ydot[3 * i..3 * i + 3].copy_from_slice(dy.as_slice());
        }
        if mu != 0.0 {
            for i in 0..n {
                for j in i + 1..n {
                    let d = v3(u, n + i) - v3(u, n + j);
                    let r = d.norm();
                    let f = d * (mu * m.planet(i) * m.planet(j) / (r * r * r));
                    for c in 0..3 {
                        ydot[3 * i + c] -= f[c];
                        ydot[3 * j + c] += f[c];
                    }
                }
            }
        }
    }
}

/// Running sum with Kahan compensation.
struct Compensated {
    value: Vec<f64>,
    carry: Vec<f64>,
}

impl Compensated {
    fn new(value: Vec<f64>) -> Self {
        let carry = vec![0.0; value.len()];
        Self { value, carry }
    }

    fn add(&mut self, delta: &[f64]) {
        for ((v, c), d) in self.value.iter_mut().zip(self.carry.iter_mut()).zip(delta) {
            let y = d - *c;
            let t = *v + y;
            *c = (t - *v) - y;
            *v = t;
        }
    }
}

fn block_scales(u: &[f64]) -> (f64, f64) {
    let half = u.len() / 2;
    let amax = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    (amax(&u[..half]), amax(&u[half..]))
}

struct GaussStepper<'a> {
    field: Field<'a>,
    k: [Vec<f64>; 3],
    z: [Vec<f64>; 3],
    tmp: Vec<f64>,
}

impl<'a> GaussStepper<'a> {
    fn new(system: &'a PlanetarySystem) -> Self {
        let d = 6 * system.n();
        Self {
            field: Field::new(system),
            k: [vec![0.0; d], vec![0.0; d], vec![0.0; d]],
            z: [vec![0.0; d], vec![0.0; d], vec![0.0; d]],
            tmp: vec![0.0; d],
        }
    }

    /// Increment of one step, or the final stage residual on failure.
    #[allow(clippy::needless_range_loop)]
    fn increment(&mut self, u: &[f64], h: f64, tol: f64, max_iter: usize) -> core::result::Result<Vec<f64>, f64> {
        let d = u.len();
        let half = d / 2;
        let (sy, sx) = block_scales(u);
        self.field.eval(u, &mut self.tmp);
        for s in 0..3 {
            for c in 0..d {
                self.z[s][c] = GAUSS_C[s] * h * self.tmp[c];
            }
        }
        let mut change = f64::INFINITY;
        // Once below `tol`, keep iterating while the change still halves, so
        // the accepted stages sit at the rounding floor.
        let mut polishing = false;
        for _ in 0..max_iter {
            let previous = change;
            for s in 0..3 {
                for c in 0..d {
                    self.tmp[c] = u[c] + self.z[s][c];
                }
                let (tmp, k) = (&self.tmp, &mut self.k[s]);
                self.field.eval(tmp, k);
            }
            change = 0.0;
            for s in 0..3 {
                for c in 0..d {
                    let new = h * (GAUSS_A[s][0] * self.k[0][c] + GAUSS_A[s][1] * self.k[1][c] + GAUSS_A[s][2] * self.k[2][c]);
                    let scale = if c < half { sy } else { sx };
                    change = change.max((new - self.z[s][c]).abs() / scale);
                    self.z[s][c] = new;
                }
            }
            if !change.is_finite() {
                return Err(change);
            }
            if change <= tol {
                polishing = true;
            }
            if polishing && (change == 0.0 || change > 0.5 * previous) {
                return Ok((0..d)
                    .map(|c| h * (GAUSS_B[0] * self.k[0][c] + GAUSS_B[1] * self.k[1][c] + GAUSS_B[2] * self.k[2][c]))
                    .collect());
            }
        }
        Err(change)
    }
}

/// One splitting step, in place.
fn split_step(system: &PlanetarySystem, state: &mut CartesianState, h: f64) -> Result<()> {
    let m = &system.masses;
    let n = m.n();
    let mu = m.mu();
    let kick = |s: &mut CartesianState, tau: f64| {
        for i in 0..n {
            for j in i + 1..n {
                let d = s.x[i] - s.x[j];
                let r = d.norm();
                let f = d * (tau * mu * m.planet(i) * m.planet(j) / (r * r * r));
                s.y[i] -= f;
                s.y[j] += f;
            }
        }
    };
    let drift = |s: &mut CartesianState, tau: f64| {
        let total: Vec3 = s.y.iter().sum();
        for i in 0..n {
            let shift = (total - s.y[i]) * (tau * mu / m.m0());
            s.x[i] += shift;
        }
    };
    kick(state, 0.5 * h);
    drift(state, 0.5 * h);
    for i in 0..n {
        let el = cartesian_to_elements(&state.y[i], &state.x[i], m, i)?;
        let advanced = el.with_mean_anomaly(el.mean_anomaly + m.mean_motion(i, el.a) * h);
        let (y, x) = elements_to_cartesian(&advanced, m, i)?;
        state.y[i] = y;
        state.x[i] = x;
    }
    drift(state, 0.5 * h);
    kick(state, 0.5 * h);
    Ok(())
}

/// Integrate from `state0` over `span` (negative for backward).
pub fn integrate(system: &PlanetarySystem, state0: &CartesianState, span: f64, spec: &IntegratorSpec) -> Result<Trajectory> {
    if state0.n() != system.n() {
        return Err(Error::Dimension {
            expected: system.n(),
            got: state0.n(),
        });
    }
    if !(spec.dt > 0.0) || !span.is_finite() {
        return Err(Error::domain("step must be positive and span finite"));
    }
    if spec.stride == 0 {
        return Err(Error::domain("output stride must be positive"));
    }
    system.check_collisions(state0)?;
    let steps = ((span.abs() / spec.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut traj = Trajectory {
        system: system.clone(),
        times: vec![0.0],
        states: vec![state0.clone()],
        step: h,
        method: spec.method,
        truncated: None,
    };
    let record = |traj: &mut Trajectory, step: usize, state: CartesianState| {
        traj.times.push(step as f64 * h);
        traj.states.push(state);
    };
    match spec.method {
        Method::Gauss6 => {
            let mut stepper = GaussStepper::new(system);
            let mut u = Compensated::new(state0.to_flat());
            for step in 1..=steps {
                let inc = stepper
                    .increment(&u.value, h, spec.solve_tol, spec.max_iterations)
                    .map_err(|residual| Error::ImplicitSolve { step, residual })?;
                u.add(&inc);
                let state = CartesianState::from_flat(&u.value)?;
                if let Err(e) = system.check_collisions(&state) {
                    record(&mut traj, step, state);
                    traj.truncated = Some(e);
                    return Ok(traj);
                }
                if step % spec.stride == 0 || step == steps {
                    record(&mut traj, step, state);
                }
            }
        }
        Method::KeplerSplit => {
            let mut state = state0.clone();
            for step in 1..=steps {
                split_step(system, &mut state, h)?;
                if let Err(e) = system.check_collisions(&state) {
                    record(&mut traj, step, state);
                    traj.truncated = Some(e);
                    return Ok(traj);
                }
                if step % spec.stride == 0 || step == steps {
                    record(&mut traj, step, state.clone());
                }
            }
        }
    }
    Ok(traj)
}

/// Least-squares line `y ≈ a + b t`: returns `(b, standard error of b)`.
pub fn linear_trend(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    if t.len() < 3 {
        return (0.0, f64::INFINITY);
    }
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - mt) * (v - mt)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = t
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - my - slope * (a - mt);
            r * r
        })
        .sum();
    (slope, (resid / (n - 2.0) / sxx).sqrt())
}

/// Slope of the unwrapped angle sequence against time.
pub fn angle_rate(t: &[f64], angles: &[f64]) -> f64 {
    let mut unwrapped = Vec::with_capacity(angles.len());
    let mut acc = 0.0;
    for (i, a) in angles.iter().enumerate() {
        if i == 0 {
            acc = *a;
        } else {
            acc += wrap_pi(a - angles[i - 1]);
        }
        unwrapped.push(acc);
    }
    linear_trend(t, &unwrapped).0
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &CartesianState {
        self.states.last().expect("a trajectory holds its initial state")
    }

    /// `(H(t) − H(0))/|H(0)|` at every sample.
    pub fn energy_errors(&self) -> Result<Vec<f64>> {
        let h0 = self.system.evaluate(&self.states[0])?.total;
        self.states
            .iter()
            .map(|s| Ok((self.system.evaluate(s)?.total - h0) / h0.abs()))
            .collect()
    }

    /// Largest relative energy error.
    pub fn energy_drift(&self) -> Result<f64> {
        Ok(self.energy_errors()?.iter().fold(0.0f64, |m, e| m.max(e.abs())))
    }

    /// Slope (per unit time) of the relative energy error and its standard
    /// error.
    pub fn energy_trend(&self) -> Result<(f64, f64)> {
        Ok(linear_trend(&self.times, &self.energy_errors()?))
    }

    /// Largest deviation of each component of `C = Σ x × y`.
    pub fn angular_momentum_drift(&self) -> Vec3 {
        let c0 = self.states[0].total_angular_momentum();
        self.states.iter().fold(Vec3::zeros(), |acc, s| {
            let d = s.total_angular_momentum() - c0;
            Vec3::new(acc.x.max(d.x.abs()), acc.y.max(d.y.abs()), acc.z.max(d.z.abs()))
        })
    }

    /// `max |ΔC| / |C₀|`.
    pub fn angular_momentum_relative_drift(&self) -> f64 {
        let c0 = self.states[0].total_angular_momentum();
        self.states
            .iter()
            .map(|s| (s.total_angular_momentum() - c0).norm())
            .fold(0.0, f64::max)
            / c0.norm()
    }
}

/// Drift of the integrals of the reduced chart along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PStarDrift {
    /// `max |Θ₀(t) − Θ₀(0)|`.
    pub theta0: f64,
    /// `max |ϑ₀(t) − ϑ₀(0)|`, modulo 2π.
    pub vartheta0: f64,
    /// `max |χ₀(t) − χ₀(0)|`.
    pub chi0: f64,
    /// `χ₀(0)`, the natural scale of the actions.
    pub chi0_initial: f64,
    /// Fitted rate of the conjugate angle `κ₀`.
    pub kappa0_rate: f64,
    /// Samples mapped before the chart was left, if it was.
    pub evaluated: usize,
    pub exit: Option<(usize, Error)>,
}

impl PStarDrift {
    /// `(Θ₀, χ₀)` drifts over `χ₀(0)` and the `ϑ₀` drift in radians.
    pub fn relative(&self) -> (f64, f64, f64) {
        (self.theta0 / self.chi0_initial, self.vartheta0, self.chi0 / self.chi0_initial)
    }
}

pub fn pstar_trajectory(traj: &Trajectory, chart: &PStarChart) -> (Vec<PStarCoords>, Option<(usize, Error)>) {
    let mut out = Vec::with_capacity(traj.len());
    for (i, s) in traj.states.iter().enumerate() {
        match chart.from_cartesian(s) {
            Ok(c) => out.push(c),
            Err(e) => return (out, Some((i, e))),
        }
    }
    (out, None)
}

pub fn pstar_integral_drift(traj: &Trajectory, chart: &PStarChart) -> Result<PStarDrift> {
    let (coords, exit) = pstar_trajectory(traj, chart);
    let first = coords
        .first()
        .ok_or_else(|| Error::domain("initial state is outside the reduced chart"))?;
    let (mut theta0, mut vartheta0, mut chi0) = (0.0f64, 0.0f64, 0.0f64);
    for c in &coords {
        theta0 = theta0.max((c.theta[0] - first.theta[0]).abs());
        vartheta0 = vartheta0.max(wrap_pi(c.vartheta[0] - first.vartheta[0]).abs());
        chi0 = chi0.max((c.chi[0] - first.chi[0]).abs());
    }
    let kappa: Vec<f64> = coords.iter().map(|c| c.kappa[0]).collect();
    Ok(PStarDrift {
        theta0,
        vartheta0,
        chi0,
        chi0_initial: first.chi[0],
        kappa0_rate: angle_rate(&traj.times[..coords.len()], &kappa),
        evaluated: coords.len(),
        exit,
    })
}

/// Largest distance of the inner angles `ϑ₁…` from `{0, π}` and of the
/// inner `Θ₁…` from zero, over a trajectory.
pub fn planarity_defect(coords: &[PStarCoords]) -> (f64, f64) {
    let mut theta = 0.0f64;
    let mut angle = 0.0f64;
    for c in coords {
        for j in 1..c.n() {
            theta = theta.max(c.theta[j].abs());
            let v = wrap_2pi(c.vartheta[j]);
            angle = angle.max(v.min((v - PI).abs()).min(TAU - v));
        }
    }
    (theta, angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{e1, e3, rotate_about};
    use crate::two_body::{EllipseElements, SystemMasses};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two planets, the outer one tilted by `tilt` about the first axis.
    fn two_planets(mu: f64, e: [f64; 2], tilt: f64) -> (PlanetarySystem, CartesianState) {
        let masses = SystemMasses::new(1.0, mu, vec![1.0, 0.8]).unwrap();
        let base = rotate_about(&e1(), 0.3, &e3());
        let hinge = base.cross(&e1()).normalize();
        let normals = [base, rotate_about(&hinge, tilt, &base)];
        let mut y = Vec::new();
        let mut x = Vec::new();
        for i in 0..2 {
            let n = normals[i];
            let p = n.cross(&Vec3::new(0.2, 1.0, 0.4)).normalize();
            let el = EllipseElements {
                a: [1.0, 2.5][i],
                e: e[i],
                perihelion: p,
                normal: n,
                mean_anomaly: [0.4, 2.9][i],
            };
            let (yi, xi) = elements_to_cartesian(&el, &masses, i).unwrap();
            y.push(yi);
            x.push(xi);
        }
        (PlanetarySystem::new(masses), CartesianState { y, x })
    }

    fn inner_period(sys: &PlanetarySystem) -> f64 {
        TAU / sys.masses.mean_motion(0, 1.0)
    }

    fn element_drift(sys: &PlanetarySystem, traj: &Trajectory) -> f64 {
        let s0 = &traj.states[0];
        let mut worst = 0.0f64;
        for s in &traj.states {
            for i in 0..sys.n() {
                let a = cartesian_to_elements(&s0.y[i], &s0.x[i], &sys.masses, i).unwrap();
                let b = cartesian_to_elements(&s.y[i], &s.x[i], &sys.masses, i).unwrap();
                worst = worst
                    .max((a.a - b.a).abs() / a.a)
                    .max((a.e - b.e).abs())
                    .max((a.perihelion - b.perihelion).norm())
                    .max((a.normal - b.normal).norm());
            }
        }
        worst
    }

    #[test]
    fn field_matches_hamiltonian_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (sys, _) = two_planets(1e-2, [0.3, 0.2], 0.35);
        let field = Field::new(&sys);
        for _ in 0..20 {
            let flat: Vec<f64> = (0..12).map(|k| rng.random_range(-1.0..1.0) + if k >= 6 { 2.0 * (k % 2) as f64 } else { 0.0 }).collect();
            let state = CartesianState::from_flat(&flat).unwrap();
            let (dy, dx) = sys.gradient(&state).unwrap();
            let mut out = vec![0.0; 12];
            field.eval(&flat, &mut out);
            for i in 0..2 {
                for c in 0..3 {
                    assert!((out[3 * i + c] + dx[i][c]).abs() < 1e-14 * (1.0 + dx[i][c].abs()));
                    assert!((out[6 + 3 * i + c] - dy[i][c]).abs() < 1e-14 * (1.0 + dy[i][c].abs()));
                }
            }
        }
    }

    #[test]
    fn decoupled_planets_keep_their_ellipses() {
        let (sys, s0) = two_planets(0.0, [0.3, 0.2], 0.35);
        let p = inner_period(&sys);
        for (method, div) in [(Method::Gauss6, 600.0), (Method::KeplerSplit, 50.0)] {
            let spec = IntegratorSpec::new(p / div, method).with_stride(5000);
            let traj = integrate(&sys, &s0, 1000.0 * p, &spec).unwrap();
            let drift = element_drift(&sys, &traj);
            assert!(drift < 1e-10, "{method}: {drift}");
        }
    }

    #[test]
    fn angular_momentum_is_conserved() {
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.35);
        let p = inner_period(&sys);
        for method in [Method::Gauss6, Method::KeplerSplit] {
            let traj = integrate(&sys, &s0, 100.0 * p, &IntegratorSpec::new(p / 100.0, method)).unwrap();
            assert!(traj.angular_momentum_relative_drift() < 1e-11, "{method}");
            let d = traj.angular_momentum_drift();
            assert!(d.amax() <= traj.angular_momentum_relative_drift() * s0.total_angular_momentum().norm() + 1e-300);
        }
    }

    #[test]
    fn energy_error_has_the_method_order() {
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.35);
        let p = inner_period(&sys);
        for (method, divs) in [(Method::Gauss6, [20.0, 40.0]), (Method::KeplerSplit, [200.0, 400.0])] {
            let err: Vec<f64> = divs
                .iter()
                .map(|d| {
                    let spec = IntegratorSpec::new(p / d, method).with_stride(1);
                    integrate(&sys, &s0, 5.0 * p, &spec).unwrap().energy_drift().unwrap()
                })
                .collect();
            let order = (err[0] / err[1]).log2();
            assert!((order - method.order() as f64).abs() < 0.5, "{method}: {order} from {err:?}");
        }
    }

    #[test]
    fn gauss_is_time_reversible() {
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.35);
        let p = inner_period(&sys);
        let spec = IntegratorSpec::new(p / 40.0, Method::Gauss6);
        let fwd = integrate(&sys, &s0, 10.0 * p, &spec).unwrap();
        let back = integrate(&sys, fwd.last(), -10.0 * p, &spec).unwrap();
        assert!(back.step < 0.0);
        let err = back.last().max_relative_difference(&s0);
        assert!(err < 10.0 * DEFAULT_SOLVE_TOL, "{err}");
    }

    #[test]
    fn flow_commutes_with_mirror() {
        use crate::charts::symmetry::mirror_cartesian;
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.35);
        let p = inner_period(&sys);
        let spec = IntegratorSpec::new(p / 60.0, Method::Gauss6);
        let a = integrate(&sys, &mirror_cartesian(&s0), 5.0 * p, &spec).unwrap();
        let b = integrate(&sys, &s0, 5.0 * p, &spec).unwrap();
        let err = a.last().max_relative_difference(&mirror_cartesian(b.last()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn reduced_integrals_are_constant_and_kappa_precesses() {
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.35);
        let p = inner_period(&sys);
        let spec = IntegratorSpec::new(p / 100.0, Method::Gauss6).with_stride(200);
        let traj = integrate(&sys, &s0, 300.0 * p, &spec).unwrap();
        let chart = PStarChart::new(sys.masses.clone());
        let drift = pstar_integral_drift(&traj, &chart).unwrap();
        assert!(drift.exit.is_none());
        let (t, v, c) = drift.relative();
        assert!(t < 1e-8 && v < 1e-8 && c < 1e-8, "{drift:?}");
        // κ₀ moves at a secular, O(μ) rate
        assert!(drift.kappa0_rate.abs() * 300.0 * p > 1e-3, "{drift:?}");
        assert!(drift.kappa0_rate.abs() < 1e-1);
    }

    #[test]
    fn planar_motion_stays_planar() {
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.0);
        let p = inner_period(&sys);
        let spec = IntegratorSpec::new(p / 100.0, Method::Gauss6).with_stride(50);
        let traj = integrate(&sys, &s0, 50.0 * p, &spec).unwrap();
        let chart = PStarChart::new(sys.masses.clone());
        let (coords, exit) = pstar_trajectory(&traj, &chart);
        assert!(exit.is_none());
        let (theta, angle) = planarity_defect(&coords);
        assert!(theta < 1e-12 * coords[0].chi[0] && angle < 1e-10, "{theta} {angle}");
    }

    #[test]
    fn collision_truncates_the_trajectory() {
        let (sys, s0) = two_planets(1e-3, [0.6, 0.5], 0.0);
        // the inner perihelion distance is 0.4
        let sys = sys.with_collision_radius(0.45);
        let p = inner_period(&sys);
        let traj = integrate(&sys, &s0, 50.0 * p, &IntegratorSpec::new(p / 100.0, Method::Gauss6)).unwrap();
        assert!(matches!(traj.truncated, Some(Error::Collision { .. })), "{:?}", traj.truncated);
        assert!(*traj.times.last().unwrap() < 50.0 * p);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn failed_stage_solve_is_an_error() {
        let (sys, s0) = two_planets(1e-3, [0.3, 0.2], 0.35);
        let mut spec = IntegratorSpec::new(0.5, Method::Gauss6);
        spec.max_iterations = 2;
        assert!(matches!(integrate(&sys, &s0, 1.0, &spec), Err(Error::ImplicitSolve { step: 1, .. })));
    }

    #[test]
    fn trend_fit_recovers_a_line() {
        let t: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| 2.0 + 0.5 * v).collect();
        let (slope, err) = linear_trend(&t, &y);
        assert!((slope - 0.5).abs() < 1e-14 && err < 1e-12);
        let angles: Vec<f64> = t.iter().map(|v| wrap_2pi(0.3 * v)).collect();
        assert!((angle_rate(&t, &angles) - 0.3).abs() < 1e-12);
        assert_eq!(Method::parse("gauss6"), Some(Method::Gauss6));
        assert_eq!(Method::parse(Method::KeplerSplit.id()), Some(Method::KeplerSplit));
    }
}
