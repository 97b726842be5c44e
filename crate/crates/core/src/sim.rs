//! Fixed-step RK4 integration with containment monitors, boundary event
//! refinement and plan execution.

use crate::construct::Ellipsoid;
use crate::error::{Error, Result};
use crate::geometry::{Polytope, GEOM_TOL};
use crate::steer::{ControlLaw, SteeringPlan};
use crate::system::AffineSystem;
use crate::Vector;

pub const DEFAULT_DT: f64 = 1e-3;
/// Event times are bisected to this width.
pub const EVENT_TOL: f64 = 1e-10;

/// One classical Runge–Kutta step of `ẋ = f(t, x)`.
pub fn rk4_step<F>(f: &F, t: f64, x: &Vector, dt: f64) -> Result<Vector>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * dt, &(x + &k1 * (0.5 * dt)))?;
    let k3 = f(t + 0.5 * dt, &(x + &k2 * (0.5 * dt)))?;
    let k4 = f(t + dt, &(x + &k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Fixed-step RK4 from `t0` to `t1`; the last step is shortened to land on `t1`.
pub fn rk4<F>(f: &F, x0: &Vector, t0: f64, t1: f64, dt: f64) -> Result<Vector>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
{
    if !(dt > 0.0) {
        return Err(Error::Input("step size must be positive".into()));
    }
    let mut t = t0;
    let mut x = x0.clone();
    while t < t1 - 1e-12 * dt.max(t1.abs()) {
        let h = dt.min(t1 - t);
        x = rk4_step(f, t, &x, h)?;
        t += h;
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonitorSet {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
}

impl MonitorSet {
    /// Functional that is negative inside and zero on the boundary.
    pub fn functional(&self, x: &Vector) -> f64 {
        match self {
            MonitorSet::Polytope(p) => p.max_facet_value(x),
            MonitorSet::Ellipsoid(e) => e.value(x) - e.level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorMode {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorAction {
    Record,
    Abort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    pub name: String,
    pub set: MonitorSet,
    pub mode: MonitorMode,
    pub action: MonitorAction,
}

impl Monitor {
    pub fn new(name: impl Into<String>, set: MonitorSet, mode: MonitorMode, action: MonitorAction) -> Self {
        Self { name: name.into(), set, mode, action }
    }

    pub fn violated(&self, x: &Vector) -> bool {
        let g = self.set.functional(x);
        match self.mode {
            MonitorMode::Open => g >= -GEOM_TOL,
            MonitorMode::Closed => g > GEOM_TOL,
        }
    }
}

/// First exit from a monitored set.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub monitor: String,
    pub time: f64,
    pub state: Vector,
    /// Monitor functional at `state`.
    pub value: f64,
}

/// Integration stops at `t_end`, or earlier on entering the closed ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub t_end: f64,
    pub target: Option<(Vector, f64)>,
}

impl Stop {
    pub fn at(t_end: f64) -> Self {
        Self { t_end, target: None }
    }

    pub fn ball(center: Vector, radius: f64, t_max: f64) -> Self {
        Self { t_end: t_max, target: Some((center, radius)) }
    }

    fn reached(&self, x: &Vector) -> bool {
        self.target.as_ref().is_some_and(|(c, r)| (x - c).norm() <= *r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub controls: Vec<Vector>,
    pub events: Vec<Event>,
    pub aborted: bool,
    /// True when a ball target was entered.
    pub reached_target: bool,
}

impl Trajectory {
    pub fn endpoint(&self) -> &Vector {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }

    pub fn max_control_norm(&self) -> f64 {
        self.controls.iter().map(|u| u.norm()).fold(0.0, f64::max)
    }

    pub fn first_event(&self, monitor: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.monitor == monitor)
    }
}

fn closed_loop<'a>(sys: &'a AffineSystem, law: &'a ControlLaw) -> impl Fn(f64, &Vector) -> Result<Vector> + 'a {
    move |t, x| {
        let u = law.eval(t, x).map_err(|e| match e {
            Error::Domain(msg) => Error::Simulation { time: t, message: msg },
            other => other,
        })?;
        Ok(sys.field(x, &u))
    }
}

/// Bisect `[t, t + h]` for the first time `pred` holds (false at `t`, true at `t + h`).
fn refine<F, P>(f: &F, t: f64, x: &Vector, h: f64, pred: P) -> Result<(f64, Vector)>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
    P: Fn(&Vector) -> bool,
{
    let (mut lo, mut hi) = (0.0, h);
    let mut x_hi = rk4_step(f, t, x, h)?;
    while hi - lo > EVENT_TOL {
        let mid = 0.5 * (lo + hi);
        let xm = rk4_step(f, t, x, mid)?;
        if pred(&xm) {
            hi = mid;
            x_hi = xm;
        } else {
            lo = mid;
        }
    }
    Ok((t + hi, x_hi))
}

/// RK4 integration of `sys` under `law` from local time 0.
pub fn integrate(sys: &AffineSystem, law: &ControlLaw, x0: &Vector, stop: &Stop, dt: f64, monitors: &[Monitor]) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::Input("step size must be positive".into()));
    }
    if x0.len() != sys.n() {
        return Err(Error::Dimension("initial state has wrong dimension".into()));
    }
    let f = closed_loop(sys, law);
    let control = |t: f64, x: &Vector| law.eval(t, x).map_err(|e| Error::Simulation { time: t, message: e.to_string() });
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
        controls: vec![control(0.0, x0)?],
        events: Vec::new(),
        aborted: false,
        reached_target: false,
    };
    let mut tripped = vec![false; monitors.len()];
    for (i, m) in monitors.iter().enumerate() {
        if m.violated(x0) {
            tripped[i] = true;
            traj.events.push(Event { monitor: m.name.clone(), time: 0.0, state: x0.clone(), value: m.set.functional(x0) });
            if m.action == MonitorAction::Abort {
                traj.aborted = true;
                return Ok(traj);
            }
        }
    }
    if stop.reached(x0) {
        traj.reached_target = true;
        return Ok(traj);
    }
    let mut t = 0.0;
    let mut x = x0.clone();
    while t < stop.t_end - 1e-12 * dt.max(stop.t_end.abs()) {
        let h = dt.min(stop.t_end - t);
        let next = rk4_step(&f, t, &x, h)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation { time: t + h, message: "state diverged".into() });
        }
        // earliest abort event inside the step wins
        let mut abort_at: Option<(f64, Vector)> = None;
        for (i, m) in monitors.iter().enumerate() {
            if tripped[i] || !m.violated(&next) {
                continue;
            }
            tripped[i] = true;
            // bisect on the boundary itself; an open monitor may trip just inside it
            let level = m.set.functional(&next).min(0.0);
            let (te, xe) = refine(&f, t, &x, h, |y| m.set.functional(y) >= level)?;
            traj.events.push(Event { monitor: m.name.clone(), time: te, state: xe.clone(), value: m.set.functional(&xe) });
            if m.action == MonitorAction::Abort && abort_at.as_ref().is_none_or(|(ta, _)| te < *ta) {
                abort_at = Some((te, xe));
            }
        }
        if let Some((te, xe)) = abort_at {
            traj.controls.push(control(te, &xe)?);
            traj.times.push(te);
            traj.states.push(xe);
            traj.aborted = true;
            return Ok(traj);
        }
        if stop.reached(&next) {
            let (te, xe) = refine(&f, t, &x, h, |y| stop.reached(y))?;
            traj.controls.push(control(te, &xe)?);
            traj.times.push(te);
            traj.states.push(xe);
            traj.reached_target = true;
            return Ok(traj);
        }
        t += h;
        x = next;
        traj.controls.push(control(t, &x)?);
        traj.times.push(t);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRun {
    pub label: String,
    pub start: f64,
    pub duration: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub contained: bool,
    /// Phase index and event of the first exit from the outer set.
    pub violation: Option<(usize, Event)>,
    pub endpoint: Vector,
    pub endpoint_error: f64,
    pub max_control_norm: f64,
    pub phases: Vec<PhaseRun>,
}

impl PlanReport {
    pub fn total_time(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }
}

/// Execute the plan phase by phase under an open abort monitor on `x_outer`.
pub fn verify_plan(plan: &SteeringPlan, x_outer: &Polytope, dt: f64) -> Result<PlanReport> {
    let monitor = Monitor::new("X'", MonitorSet::Polytope(x_outer.clone()), MonitorMode::Open, MonitorAction::Abort);
    let mut x = plan.start.clone();
    let mut start = 0.0;
    let mut phases = Vec::new();
    let mut max_u: f64 = 0.0;
    let mut violation = None;
    for (k, phase) in plan.phases.iter().enumerate() {
        let traj = integrate(&plan.system, &phase.law, &x, &Stop::at(phase.duration), dt, std::slice::from_ref(&monitor))?;
        max_u = max_u.max(traj.max_control_norm());
        x = traj.endpoint().clone();
        let duration = traj.duration();
        let aborted = traj.aborted;
        if aborted {
            violation = Some((k, traj.events[0].clone()));
        }
        phases.push(PhaseRun { label: phase.label.clone(), start, duration, trajectory: traj });
        start += duration;
        if aborted {
            break;
        }
    }
    let endpoint_error = (&x - &plan.target).norm();
    Ok(PlanReport { contained: violation.is_none(), violation, endpoint: x, endpoint_error, max_control_norm: max_u, phases })
}
