//! Steering controllers: Gramian open-loop transfer, affine and piecewise
//! affine feedback, time-reversed replay, and the composite plan that
//! approaches an equilibrium, bridges, and departs towards the target.

use crate::certify::{cone_lp, CertifyOptions, Direction};
use crate::construct::{InvariantCandidate, WitnessSet};
use crate::error::{Error, Result};
use crate::geometry::{Containment, Polytope, Simplex};
use crate::numerics::control::{gramian, stabilize};
use crate::numerics::expm::expm;
use crate::numerics::linalg::{inverse, solve};
use crate::numerics::lyapunov::solve_riccati;
use crate::sim::{integrate, verify_plan, Monitor, MonitorAction, MonitorMode, MonitorSet, Stop, Trajectory, DEFAULT_DT};
use crate::system::AffineSystem;
use crate::{Matrix, Vector};

/// Barycentric tolerance for picking a PWA cell.
pub const CELL_TOL: f64 = 1e-12;
/// Maximum number of RK4 steps in an approach or departure phase.
pub const PHASE_STEP_CAP: usize = 100_000;
pub const BRIDGE_T_F: f64 = 1.0;
pub const BRIDGE_RETRIES: usize = 12;
/// Default ρ as a fraction of the smallest vertex distance of X from the equilibrium.
pub const RHO_FRACTION: f64 = 1e-3;
/// Endpoint tolerance as a multiple of ρ.
pub const RHO_PRIME_FACTOR: f64 = 10.0;
/// Vertex shrink factor used by the λ estimator.
pub const LAMBDA_SHRINK: f64 = 1e-2;

/// `u(t) = ū + Bᵀ e^{-Aᵀ t} ξ` with `ξ = W⁻¹(−x̃ + e^{-A t_f} ỹ)` in coordinates about `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianLaw {
    pub a: Matrix,
    pub b: Matrix,
    pub xi: Vector,
    pub center: Vector,
    pub u_bar: Vector,
    pub t_f: f64,
}

impl GramianLaw {
    pub fn eval(&self, t: f64) -> Result<Vector> {
        let e = expm(&(-self.a.transpose() * t))?;
        Ok(&self.u_bar + self.b.transpose() * (e * &self.xi))
    }
}

/// `u = ū + K (x − center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLaw {
    pub k: Matrix,
    pub center: Vector,
    pub u_bar: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PwaCell {
    pub simplex: Simplex,
    /// Column `i` is the control at simplex vertex `i`.
    pub controls: Matrix,
    origin: Vector,
    edge_inv: Matrix,
}

impl PwaCell {
    fn new(simplex: Simplex, controls: Matrix) -> Result<Self> {
        let vs = simplex.vertices();
        let n = simplex.dim();
        let origin = vs[0].clone();
        let edges = Matrix::from_fn(n, n, |r, c| vs[c + 1][r] - origin[r]);
        let edge_inv = inverse(&edges).map_err(|_| Error::Numerical("degenerate PWA cell".into()))?;
        Ok(Self { simplex, controls, origin, edge_inv })
    }

    pub fn barycentric(&self, x: &Vector) -> Vector {
        let mu = &self.edge_inv * (x - &self.origin);
        let mut l = Vector::zeros(mu.len() + 1);
        l[0] = 1.0 - mu.sum();
        l.rows_mut(1, mu.len()).copy_from(&mu);
        l
    }

    pub fn eval(&self, x: &Vector) -> Vector {
        &self.controls * self.barycentric(x)
    }
}

/// Continuous piecewise affine feedback over a star triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PwaLaw {
    pub cells: Vec<PwaCell>,
    pub apex: Vector,
}

impl PwaLaw {
    /// Lowest-index cell whose barycentric coordinates are all `>= -CELL_TOL`.
    pub fn cell_of(&self, x: &Vector) -> Option<usize> {
        self.cells.iter().position(|c| c.barycentric(x).min() >= -CELL_TOL)
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let i = self.cell_of(x).ok_or_else(|| Error::Domain(format!("state {} lies outside the PWA domain", crate::certify::fmt_vec(x))))?;
        Ok(self.cells[i].eval(x))
    }
}

/// Replays a recorded backward run forward in time: `u(t) = inner(x_b(T − t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversedLaw {
    pub inner: Box<ControlLaw>,
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    /// Backward-flow derivatives at the samples, for Hermite interpolation.
    pub slopes: Vec<Vector>,
    pub total: f64,
}

impl ReversedLaw {
    pub fn from_backward(backward: &AffineSystem, inner: ControlLaw, traj: &Trajectory) -> Self {
        let slopes = traj.states.iter().zip(&traj.controls).map(|(x, u)| backward.field(x, u)).collect();
        Self { inner: Box::new(inner), times: traj.times.clone(), states: traj.states.clone(), slopes, total: traj.duration() }
    }

    /// Backward state at backward time `s` (cubic Hermite between samples).
    pub fn backward_state(&self, s: f64) -> Vector {
        let last = self.times.len() - 1;
        if last == 0 || s <= self.times[0] {
            return self.states[0].clone();
        }
        if s >= self.times[last] {
            return self.states[last].clone();
        }
        let k = self.times.partition_point(|&t| t <= s).saturating_sub(1).min(last - 1);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let r = (s - t0) / h;
        let (r2, r3) = (r * r, r * r * r);
        let h00 = 2.0 * r3 - 3.0 * r2 + 1.0;
        let h10 = r3 - 2.0 * r2 + r;
        let h01 = -2.0 * r3 + 3.0 * r2;
        let h11 = r3 - r2;
        &self.states[k] * h00 + &self.slopes[k] * (h10 * h) + &self.states[k + 1] * h01 + &self.slopes[k + 1] * (h11 * h)
    }

    pub fn eval(&self, t: f64) -> Result<Vector> {
        let s = self.total - t;
        let xb = self.backward_state(s);
        self.inner.eval(s, &xb)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlLaw {
    Zero { m: usize },
    Gramian(GramianLaw),
    Affine(AffineLaw),
    Pwa(PwaLaw),
    Reversed(ReversedLaw),
}

impl ControlLaw {
    /// Control at local time `t` and state `x`.
    pub fn eval(&self, t: f64, x: &Vector) -> Result<Vector> {
        match self {
            ControlLaw::Zero { m } => Ok(Vector::zeros(*m)),
            ControlLaw::Gramian(g) => g.eval(t),
            ControlLaw::Affine(f) => Ok(&f.u_bar + &f.k * (x - &f.center)),
            ControlLaw::Pwa(p) => p.eval(x),
            ControlLaw::Reversed(r) => r.eval(t),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ControlLaw::Zero { .. } => "zero",
            ControlLaw::Gramian(_) => "open-loop gramian",
            ControlLaw::Affine(_) => "affine feedback",
            ControlLaw::Pwa(_) => "pwa feedback",
            ControlLaw::Reversed(_) => "time-reversed replay",
        }
    }
}

/// Gramian transfer from `x` to `y` in time `t_f` about the equilibrium `center`.
pub fn gramian_steer_about(sys: &AffineSystem, center: &Vector, x: &Vector, y: &Vector, t_f: f64) -> Result<ControlLaw> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::Input(format!("steering horizon must be positive, got {t_f}")));
    }
    if x.len() != sys.n() || y.len() != sys.n() {
        return Err(Error::Dimension("steering endpoints have wrong dimension".into()));
    }
    if !sys.is_controllable() {
        return Err(Error::Precondition("controllability Gramian is singular: (A, B) is not controllable".into()));
    }
    let (_, u_bar) = sys.translate_to_linear(center)?;
    let w = gramian(&sys.a, &sys.b, t_f)?;
    let target = expm(&(-&sys.a * t_f))? * (y - center);
    let rhs = target - (x - center);
    let xi = solve(&w, &Matrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))
        .map_err(|_| Error::Precondition("controllability Gramian is singular".into()))?
        .column(0)
        .into_owned();
    Ok(ControlLaw::Gramian(GramianLaw { a: sys.a.clone(), b: sys.b.clone(), xi, center: center.clone(), u_bar, t_f }))
}

/// Gramian transfer for a system with an equilibrium at the origin.
pub fn gramian_steer(sys: &AffineSystem, x: &Vector, y: &Vector, t_f: f64) -> Result<ControlLaw> {
    gramian_steer_about(sys, &Vector::zeros(sys.n()), x, y, t_f)
}

/// Vertex controls at half the largest strict margin achievable with
/// `|u|∞` at most twice the minimal non-strict witness (and 1, and `u_box`).
pub fn strict_vertex_controls(sys: &AffineSystem, p: &Polytope, direction: Direction, u_box: f64) -> Result<Vec<Vector>> {
    p.vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let cone = p.tangent_cone(v)?;
            // margin is maximized under a moderate cap so the witnesses stay small
            let plain = cone_lp(sys, &cone.normals, v, direction, 0.0, u_box)?;
            let cap = plain.control.as_ref().map_or(u_box, |u| (2.0 * u.amax()).max(1.0).min(u_box));
            let best = cone_lp(sys, &cone.normals, v, direction, 0.0, cap)?;
            let delta = -best.residual;
            if !(delta > 1e-12) {
                return Err(Error::Precondition(format!("vertex {i} admits no strict invariance witness (best margin {delta:.3e})")));
            }
            cone_lp(sys, &cone.normals, v, direction, 0.5 * delta, cap)?
                .control
                .ok_or_else(|| Error::Numerical(format!("strict witness LP at vertex {i} became infeasible")))
        })
        .collect()
}

/// PWA feedback on the star triangulation of `p` about `apex`, taking `u_apex` at the apex
/// and `controls[i]` at vertex `i`. Every control must be a strict witness for `direction`.
pub fn pwa_feedback(sys: &AffineSystem, p: &Polytope, direction: Direction, apex: &Vector, u_apex: &Vector, controls: &[Vector]) -> Result<PwaLaw> {
    if controls.len() != p.vertices().len() {
        return Err(Error::Dimension(format!("{} controls for {} vertices", controls.len(), p.vertices().len())));
    }
    let s = direction.sign();
    for (i, (v, u)) in p.vertices().iter().zip(controls).enumerate() {
        let f = sys.field(v, u) * s;
        let cone = p.tangent_cone(v)?;
        let worst = cone.normals.iter().map(|h| h.dot(&f)).fold(f64::NEG_INFINITY, f64::max);
        if !(worst < 0.0) {
            return Err(Error::Precondition(format!("control at vertex {i} is not a strict invariance witness")));
        }
    }
    let eq = sys.field(apex, u_apex).norm();
    if eq > 1e-9 * (1.0 + apex.norm()) {
        return Err(Error::Precondition("apex control does not hold the apex at equilibrium".into()));
    }
    let m = sys.m();
    let cells = p
        .star_triangulate(apex)?
        .into_iter()
        .map(|simplex| {
            let cols: Vec<Vector> = simplex
                .vertices()
                .iter()
                .map(|w| match p.vertex_index(w) {
                    Some(i) => controls[i].clone(),
                    None => u_apex.clone(),
                })
                .collect();
            let u = if m == 0 { Matrix::zeros(0, cols.len()) } else { Matrix::from_columns(&cols) };
            PwaCell::new(simplex, u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PwaLaw { cells, apex: apex.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEstimate {
    /// `(t_f, max over pairs of the trajectory gauge)`.
    pub per_horizon: Vec<(f64, f64)>,
    pub estimate: f64,
}

/// Smallest scaling of `x` that contains Gramian transfers between all
/// shrunk vertex pairs, minimized over the horizon grid.
pub fn estimate_lambda(sys: &AffineSystem, x: &Polytope, t_f_grid: &[f64]) -> Result<LambdaEstimate> {
    if t_f_grid.is_empty() {
        return Err(Error::Input("horizon grid is empty".into()));
    }
    let pts: Vec<Vector> = x.vertices().iter().map(|v| v * (1.0 - LAMBDA_SHRINK)).collect();
    let mut per_horizon = Vec::new();
    for &t_f in t_f_grid {
        let dt = DEFAULT_DT.min(t_f / 1000.0);
        let mut worst: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for (j, b) in pts.iter().enumerate() {
                if i == j {
                    continue;
                }
                let law = gramian_steer(sys, a, b, t_f)?;
                let traj = integrate(sys, &law, a, &Stop::at(t_f), dt, &[])?;
                for s in &traj.states {
                    worst = worst.max(x.gauge(s)?);
                }
            }
        }
        per_horizon.push((t_f, worst));
    }
    let estimate = per_horizon.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(LambdaEstimate { per_horizon, estimate })
}

/// How a phase ends.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Time,
    Ball { center: Vector, radius: f64 },
    Target { point: Vector, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanPhase {
    pub label: String,
    pub law: ControlLaw,
    pub duration: f64,
    pub termination: Termination,
    /// Set the phase is meant to stay in.
    pub containment: WitnessSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPlan {
    pub system: AffineSystem,
    pub start: Vector,
    pub target: Vector,
    pub phases: Vec<PlanPhase>,
    /// Max sampled control norm over the executed plan.
    pub bound: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub dt: f64,
    pub notes: Vec<String>,
}

impl SteeringPlan {
    pub fn total_time(&self) -> f64 {
        self.phases.iter().map(|p| p.duration).sum()
    }
}

/// Single open-loop Gramian phase from `x` to `y`, without any containment logic.
pub fn raw_gramian_plan(sys: &AffineSystem, x_outer: &Polytope, x: &Vector, y: &Vector, t_f: f64, dt: f64) -> Result<SteeringPlan> {
    let zero = Vector::zeros(sys.n());
    let center = if sys.equilibrium_input(&zero).is_ok() { zero } else { sys.equilibrium_set().project(&((x + y) * 0.5)) };
    let law = gramian_steer_about(sys, &center, x, y, t_f)?;
    let mut plan = SteeringPlan {
        system: sys.clone(),
        start: x.clone(),
        target: y.clone(),
        phases: vec![PlanPhase {
            label: "gramian".into(),
            law,
            duration: t_f,
            termination: Termination::Target { point: y.clone(), radius: 0.0 },
            containment: WitnessSet::Polytope(x_outer.clone()),
        }],
        bound: 0.0,
        rho: 0.0,
        rho_prime: 0.0,
        dt,
        notes: Vec::new(),
    };
    let traj = integrate(sys, &plan.phases[0].law, x, &Stop::at(t_f), dt, &[])?;
    plan.bound = traj.max_control_norm();
    Ok(plan)
}

/// Feedback that renders the candidate set invariant for the oriented flow,
/// with the equilibrium it converges to.
fn stabilizing_law(sys: &AffineSystem, cand: &InvariantCandidate, origin: &Vector, opts: &CertifyOptions, notes: &mut Vec<String>) -> Result<(ControlLaw, Vector)> {
    let dir = cand.direction;
    match &cand.set {
        WitnessSet::Ellipsoid(e) => {
            notes.push(format!("{}: ellipsoid feedback u = ū + K(x − x̄)", dir.label()));
            Ok((ControlLaw::Affine(AffineLaw { k: e.k.clone(), center: e.center.clone(), u_bar: e.u_bar.clone() }), e.center.clone()))
        }
        WitnessSet::Polytope(p) => {
            let u_apex = sys.equilibrium_input(origin)?;
            let oriented = dir.oriented(sys);
            let attempt = strict_vertex_controls(sys, p, dir, opts.u_box).and_then(|c| pwa_feedback(&oriented, p, Direction::Forward, origin, &u_apex, &c));
            match attempt {
                Ok(law) => {
                    notes.push(format!("{}: PWA feedback on {} cells", dir.label(), law.cells.len()));
                    Ok((ControlLaw::Pwa(law), origin.clone()))
                }
                Err(e) => {
                    notes.push(format!("{}: PWA feedback unavailable ({e}); using LQR feedback", dir.label()));
                    let (a, b) = (oriented.a.clone(), oriented.b.clone());
                    let k0 = stabilize(&a, &b)?;
                    let n = sys.n();
                    let (_, k) = solve_riccati(&a, &b, &Matrix::identity(n, n), &Matrix::identity(sys.m(), sys.m()), &k0)?;
                    Ok((ControlLaw::Affine(AffineLaw { k, center: origin.clone(), u_bar: u_apex }), origin.clone()))
                }
            }
        }
    }
}

fn outer_monitor(x_outer: &Polytope) -> Monitor {
    Monitor::new("X'", MonitorSet::Polytope(x_outer.clone()), MonitorMode::Open, MonitorAction::Abort)
}

/// Run a stabilizing law until the ρ-ball around `goal`.
fn approach(sys: &AffineSystem, law: &ControlLaw, from: &Vector, goal: &Vector, rho: f64, x_outer: &Polytope, dt: f64, phase: &str) -> Result<Trajectory> {
    let stop = Stop::ball(goal.clone(), rho, PHASE_STEP_CAP as f64 * dt);
    let traj = integrate(sys, law, from, &stop, dt, &[outer_monitor(x_outer)])?;
    if traj.aborted {
        return Err(Error::PlanFailed { phase: phase.into(), message: format!("left the interior of X' at t = {:.6}", traj.events[0].time) });
    }
    if !traj.reached_target {
        return Err(Error::PlanFailed { phase: phase.into(), message: format!("did not reach the {rho:.3e}-ball within {PHASE_STEP_CAP} steps") });
    }
    Ok(traj)
}

/// Three-phase plan from `x` to `y`: stabilize forward into a small ball,
/// Gramian bridge, then replay a backward stabilization from `y` in reverse.
#[allow(clippy::too_many_arguments)]
pub fn ribc_steering_plan(
    sys: &AffineSystem,
    x_set: &Polytope,
    x_outer: &Polytope,
    x1: &InvariantCandidate,
    x2: &InvariantCandidate,
    origin: &Vector,
    x: &Vector,
    y: &Vector,
    rho: Option<f64>,
    opts: &CertifyOptions,
) -> Result<SteeringPlan> {
    let dt = DEFAULT_DT;
    for (name, p) in [("start", x), ("target", y)] {
        if !x_set.contains(p, Containment::Open) {
            return Err(Error::Precondition(format!("{name} point must lie in the interior of X")));
        }
    }
    if x1.direction != Direction::Forward || x2.direction != Direction::Backward {
        return Err(Error::Precondition("X1 must be forward and X2 backward invariant".into()));
    }
    let rho = match rho {
        Some(r) if r > 0.0 => r,
        Some(r) => return Err(Error::Input(format!("rho must be positive, got {r}"))),
        None => RHO_FRACTION * x_set.vertices().iter().map(|v| (v - origin).norm()).fold(f64::INFINITY, f64::min),
    };
    let mut notes = vec![format!("rho = {rho:.3e}")];

    let (law1, goal1) = stabilizing_law(sys, x1, origin, opts, &mut notes)?;
    let run1 = approach(sys, &law1, x, &goal1, rho, x_outer, dt, "approach")?;
    let x_mid = run1.endpoint().clone();

    let backward = sys.backward();
    let (law3, goal3) = stabilizing_law(sys, x2, origin, opts, &mut notes)?;
    let run3 = approach(&backward, &law3, y, &goal3, rho, x_outer, dt, "departure")?;
    let z = run3.endpoint().clone();
    let replay = ReversedLaw::from_backward(&backward, law3, &run3);
    let t3 = replay.total;

    let mut t_f = BRIDGE_T_F;
    let mut bridge = None;
    for _ in 0..=BRIDGE_RETRIES {
        let law = gramian_steer_about(sys, origin, &x_mid, &z, t_f)?;
        let traj = integrate(sys, &law, &x_mid, &Stop::at(t_f), dt, &[outer_monitor(x_outer)])?;
        if !traj.aborted {
            bridge = Some(law);
            break;
        }
        notes.push(format!("bridge with t_f = {t_f} leaves X'; halving"));
        t_f *= 0.5;
    }
    let bridge = bridge.ok_or_else(|| Error::PlanFailed { phase: "bridge".into(), message: format!("gramian bridge leaves X' after {BRIDGE_RETRIES} halvings") })?;
    notes.push(format!("bridge t_f = {t_f}"));

    let outer = WitnessSet::Polytope(x_outer.clone());
    let mut plan = SteeringPlan {
        system: sys.clone(),
        start: x.clone(),
        target: y.clone(),
        phases: vec![
            PlanPhase {
                label: "approach".into(),
                law: law1,
                duration: run1.duration(),
                termination: Termination::Ball { center: goal1, radius: rho },
                containment: x1.set.clone(),
            },
            PlanPhase { label: "bridge".into(), law: bridge, duration: t_f, termination: Termination::Time, containment: outer },
            PlanPhase {
                label: "departure".into(),
                law: ControlLaw::Reversed(replay),
                duration: t3,
                termination: Termination::Target { point: y.clone(), radius: RHO_PRIME_FACTOR * rho },
                containment: x2.set.clone(),
            },
        ],
        bound: 0.0,
        rho,
        rho_prime: RHO_PRIME_FACTOR * rho,
        dt,
        notes,
    };
    let report = verify_plan(&plan, x_outer, dt)?;
    if let Some((k, ev)) = &report.violation {
        return Err(Error::PlanFailed { phase: plan.phases[*k].label.clone(), message: format!("left the interior of X' at local t = {:.6}", ev.time) });
    }
    if report.endpoint_error > plan.rho_prime {
        return Err(Error::PlanFailed {
            phase: "departure".into(),
            message: format!("endpoint error {:.3e} exceeds {:.3e}", report.endpoint_error, plan.rho_prime),
        });
    }
    plan.bound = report.max_control_norm;
    Ok(plan)
}
