//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ribc_core::certify::{
    check_ibc, check_invariance, check_ribc, cone_lp, invariance_lp, obstruction_beta, verify_beta, verify_vertex_controls, Candidates,
    CertifyOptions, Direction, IbcVerdict, RibcVerdict, U_BOX,
};
use ribc_core::construct::{check_ellipsoid, Ellipsoid, Provenance, WitnessSet};
use ribc_core::fixtures::{self, BalanceParams};
use ribc_core::geometry::Polytope;
use ribc_core::numerics::expm;
use ribc_core::numerics::lyapunov::lyapunov_derivative;
use ribc_core::sim::{integrate, verify_plan, Monitor, MonitorAction, MonitorMode, MonitorSet, Stop, DEFAULT_DT};
use ribc_core::steer::{estimate_lambda, gramian_steer, pwa_feedback, ribc_steering_plan, strict_vertex_controls, ControlLaw};
use ribc_core::system::{AffineSystem, CaseKind};
use ribc_core::{Matrix, Vector};

type Outcome = Result<String, String>;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, format!("runtime {:.2} s exceeds {limit} s", elapsed.as_secs_f64()))
}

fn same(a: &Vector, b: &Vector) -> bool {
    (a - b).amax() < 1e-12
}

/// Controls listed against vertex coordinates, reordered into the polytope's vertex order.
fn by_vertex(p: &Polytope, table: &[(&[f64], f64)]) -> Result<Vec<Vector>, String> {
    p.vertices()
        .iter()
        .map(|w| table.iter().find(|(pt, _)| same(&v(pt), w)).map(|(_, u)| v(&[*u])).ok_or_else(|| format!("vertex {w:?} not listed")))
        .collect()
}

fn worst_margin(sys: &AffineSystem, p: &Polytope, dir: Direction, controls: &[Vector], tol: f64) -> Result<f64, String> {
    let m = verify_vertex_controls(sys, p, dir, controls, tol).map_err(e)?;
    Ok(m.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn opts() -> CertifyOptions {
    CertifyOptions::default()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let fx = fixtures::example1();
    let out = invariance_lp(&fx.system, &fx.x, &v(&[1.0, -1.0]), Direction::Backward, 0.0, U_BOX).map_err(e)?;
    ensure(!out.feasible(), "backward LP at (1,-1) is feasible")?;
    let rep = check_ibc(&fx.system, &fx.x, &opts()).map_err(e)?;
    ensure(rep.verdict == IbcVerdict::NotIbc, format!("verdict {}", rep.verdict.label()))?;
    let bw = rep.backward.ok_or("no backward report")?;
    ensure(bw.failing().iter().any(|&i| same(&bw.vertices[i].vertex, &v(&[1.0, -1.0]))), "(1,-1) not among the failing vertices")?;
    within(t0.elapsed(), 1.0)?;
    Ok(format!("backward residual at (1,-1) = {:.3}, verdict not-IBC, {:.3} s", out.residual, t0.elapsed().as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let fx = fixtures::example1();
    let est = estimate_lambda(&fx.system, &fx.x, &[0.25, 0.5, 1.0, 2.0, 4.0]).map_err(e)?;
    for (t_f, l) in &est.per_horizon {
        ensure(*l > 1.8, format!("lambda({t_f}) = {l:.4}"))?;
    }
    ensure(est.per_horizon.len() == 5, "missing horizons")?;
    within(t0.elapsed(), 30.0)?;
    let vals: Vec<String> = est.per_horizon.iter().map(|(t, l)| format!("{t}:{l:.3}")).collect();
    Ok(format!("lambda per t_f [{}], {:.2} s", vals.join(" "), t0.elapsed().as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let fx = fixtures::example2();
    let outer = fx.x_outer.clone().ok_or("no outer set")?;
    let cert = check_ribc(&fx.system, &fx.x, &outer, &Candidates::default(), &opts()).map_err(e)?;
    ensure(cert.verdict == RibcVerdict::Certified, format!("verdict {}", cert.verdict.label()))?;
    let x1 = cert.x1.as_ref().ok_or("no X1")?;
    ensure(x1.provenance == Provenance::InnerPolytope, format!("X1 is {}", x1.provenance.describe()))?;
    let fwd = by_vertex(&fx.x, &[(&[-1.0, -1.0], 1.0), (&[1.0, -1.0], 0.0), (&[1.0, 1.0], -1.0), (&[-1.0, 1.0], 0.0)])?;
    let w = worst_margin(&fx.system, &fx.x, Direction::Forward, &fwd, 1e-9)?;
    ensure(w <= 1e-9, format!("forward controls (1,0,-1,0) violate by {w:e}"))?;
    let x2 = cert.x2.as_ref().ok_or("no X2")?;
    let Provenance::Extension { added, .. } = &x2.provenance else { return Err(format!("X2 is {}", x2.provenance.describe())) };
    ensure(!added.is_empty(), "extension added no vertices")?;
    for p in added {
        ensure(p[1].abs() < 1e-12 && p[0].abs() > 1.0 && p[0].abs() < 2.5, format!("extension vertex {p:?} off the x1-axis window"))?;
    }
    let hex = fixtures::skewed_hexagon();
    let hex_u = by_vertex(
        &hex,
        &[(&[-1.0, -1.0], 0.0), (&[1.0, -1.0], -4.0), (&[1.0, 1.0], 0.0), (&[-1.0, 1.0], 4.0), (&[2.25, 0.0], 0.0), (&[-2.25, 0.0], 0.0)],
    )?;
    let w = worst_margin(&fx.system, &hex, Direction::Backward, &hex_u, 1e-9)?;
    ensure(w <= 1e-9, format!("hexagon controls (0,-4,0,4,0,0) violate by {w:e}"))?;
    let xs: Vec<String> = added.iter().map(|p| format!("{:.4}", p[0])).collect();
    Ok(format!("certified through 2.5X, X2 extension at x1 = [{}], hexagon re-validates", xs.join(", ")))
}

fn criterion_4() -> Outcome {
    let fx = fixtures::example3();
    let outer = fx.x_outer.clone().ok_or("no outer set")?;
    let hex = fixtures::offset_hexagon();
    let u = by_vertex(&hex, &[(&[1.0, 1.0], -4.0), (&[0.0, 1.0], 0.0), (&[0.0, -1.0], 4.0), (&[1.0, -1.0], 0.0), (&[1.25, 0.0], 0.0), (&[-0.25, 0.0], 0.0)])?;
    let w = worst_margin(&fx.system, &hex, Direction::Forward, &u, 1e-9)?;
    ensure(w <= 1e-9, format!("forward controls (-4,0,4,0,0,0) violate by {w:e}"))?;
    let cands = Candidates { x1: Some(WitnessSet::Polytope(hex.clone())), x2: Some(WitnessSet::Polytope(hex)) };
    let cert = check_ribc(&fx.system, &fx.x, &outer, &cands, &opts()).map_err(e)?;
    ensure(cert.case.kind == CaseKind::C, format!("case {}", cert.case.kind.label()))?;
    ensure(cert.verdict == RibcVerdict::Certified, format!("verdict {}", cert.verdict.label()))?;
    for c in [&cert.x1, &cert.x2] {
        let c = c.as_ref().ok_or("missing witness")?;
        ensure(c.provenance == Provenance::UserSupplied, format!("witness is {}", c.provenance.describe()))?;
    }
    let p = cert.intersection_witness.ok_or("no intersection witness")?;
    ensure(p[1].abs() < 1e-12, format!("intersection witness {p:?} off the x1-axis"))?;
    Ok(format!("case C, certified with the user hexagon, common equilibrium ({:.4}, {:.1e})", p[0], p[1]))
}

fn criterion_5() -> Outcome {
    let sys = fixtures::cart(1.0, 1.0);
    let unit = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]).map_err(e)?;
    let rep = check_ibc(&sys, &unit, &opts()).map_err(e)?;
    ensure(rep.verdict == IbcVerdict::NotIbc, format!("unit box verdict {}", rep.verdict.label()))?;
    let fw = rep.forward.ok_or("no forward report")?;
    let v3 = fw.vertices.iter().find(|o| same(&o.vertex, &v(&[1.0, 1.0]))).ok_or("(1,1) missing")?;
    ensure(!v3.feasible(), "forward LP at (1,1) is feasible")?;
    ensure((v3.residual - 1.0).abs() <= 1e-12, format!("residual {} != 1", v3.residual))?;

    let fx = fixtures::example4();
    let cert = check_ribc(&fx.system, &fx.x, fx.x_outer.as_ref().ok_or("no outer set")?, &Candidates::default(), &opts()).map_err(e)?;
    ensure(cert.verdict == RibcVerdict::Certified, format!("0.8-box verdict {}", cert.verdict.label()))?;
    let x2 = cert.x2.as_ref().ok_or("no X2")?;
    let Provenance::Extension { added, .. } = &x2.provenance else { return Err(format!("X2 is {}", x2.provenance.describe())) };
    let mut hits = added.iter().map(|p| p[0]).collect::<Vec<_>>();
    hits.sort_by(f64::total_cmp);
    for p in added {
        ensure((p[0].abs() - 0.9).abs() < 1e-12 && p[1].abs() < 1e-12, format!("extension vertex {p:?} is not (±0.9, 0)"))?;
    }
    ensure(hits.len() == 2 && hits[0] < 0.0 && hits[1] > 0.0, format!("extension vertices {hits:?}"))?;
    let WitnessSet::Polytope(p2) = &x2.set else { return Err("X2 is not a polytope".into()) };
    let again = check_invariance(&fx.system, p2, Direction::Backward, 0.0, U_BOX).map_err(e)?;
    ensure(again.solvable, "X2 does not re-validate")?;
    Ok("unit box not-IBC (residual 1 at (1,1)); 0.8-box certified, X2 extension (±0.9, 0) re-validates".into())
}

fn criterion_6() -> Outcome {
    let fx = fixtures::example5();
    let outer = fx.x_outer.clone().ok_or("no outer set")?;
    let cert = check_ribc(&fx.system, &fx.x, &outer, &Candidates::default(), &opts()).map_err(e)?;
    ensure(cert.case.kind == CaseKind::A, format!("case {}", cert.case.kind.label()))?;
    ensure(cert.verdict == RibcVerdict::NotRibc, format!("verdict {}", cert.verdict.label()))?;
    let beta = obstruction_beta(&fx.system, &outer, 1e-9).map_err(e)?.ok_or("no beta certificate")?;
    let kernel = (fx.system.b.transpose() * &beta.beta).amax();
    ensure(kernel <= 1e-10, format!("|beta B| = {kernel:e}"))?;
    let analytic = BalanceParams::default().analytic_beta();
    let check = verify_beta(&fx.system, &outer, &analytic, 1e-9);
    ensure(check.valid, format!("analytic beta rejected: {check:?}"))?;
    Ok(format!("case A, not-RIBC, |beta B| = {kernel:.1e}, analytic beta verifies"))
}

/// Smallest eigenvalue of P, largest of the symmetrized closed-loop derivative.
fn ellipsoid_eigs(sys: &AffineSystem, el: &Ellipsoid) -> (f64, f64) {
    let p_min = SymmetricEigen::new(el.p.clone()).eigenvalues.min();
    let a_cl = (&sys.a + &sys.b * &el.k) * el.direction.sign();
    let d = lyapunov_derivative(&a_cl, &el.p);
    let d_max = SymmetricEigen::new((&d + d.transpose()) * 0.5).eigenvalues.max();
    (p_min, d_max)
}

fn support(el: &Ellipsoid, h: &Vector) -> f64 {
    let pinv = el.p.clone().try_inverse().unwrap_or_else(|| Matrix::zeros(el.p.nrows(), el.p.ncols()));
    h.dot(&el.center) + (el.level * h.dot(&(&pinv * h))).sqrt()
}

fn criterion_7a() -> Outcome {
    let fx = fixtures::example6();
    let outer = fx.x_outer.clone().ok_or("no outer set")?;
    let (e1, e2) = fixtures::circuit_ellipsoids();
    ensure(e1.level == 0.5 && e2.level == 1.0, "levels differ from 0.5 and 1")?;
    let mut parts = Vec::new();
    for (name, el) in [("P1", &e1), ("P2", &e2)] {
        let (p_min, d_max) = ellipsoid_eigs(&fx.system, el);
        ensure(p_min > 1e-6, format!("{name} smallest eigenvalue {p_min:e}"))?;
        ensure(d_max < -1e-6, format!("{name} derivative largest eigenvalue {d_max:e}"))?;
        for w in fx.x.vertices() {
            ensure(el.value(w) <= el.level + 1e-6, format!("vertex {w:?} of X outside {name}"))?;
        }
        for f in outer.facets() {
            ensure(support(el, &f.normal) <= f.offset + 1e-6, format!("{name} not inside the unit box"))?;
        }
        check_ellipsoid(&fx.system, &fx.x, &outer, el).map_err(e)?;
        parts.push(format!("{name}: min eig {p_min:.4}, derivative max eig {d_max:.4}"));
    }
    Ok(parts.join("; "))
}

fn raw_run(dt: f64) -> Result<ribc_core::sim::Trajectory, String> {
    let fx = fixtures::example6();
    let req = fx.steer.clone().ok_or("no request")?;
    let law = gramian_steer(&fx.system, &req.x, &req.y, 1.0).map_err(e)?;
    let mon = Monitor::new("X'", MonitorSet::Polytope(fx.x_outer.clone().ok_or("no outer set")?), MonitorMode::Open, MonitorAction::Record);
    integrate(&fx.system, &law, &req.x, &Stop::at(1.0), dt, &[mon]).map_err(e)
}

fn criterion_7b() -> Outcome {
    let traj = raw_run(DEFAULT_DT)?;
    let ev = traj.first_event("X'").ok_or("raw Gramian transfer stays inside the unit box")?;
    let (k, peak) = traj.states.iter().enumerate().map(|(i, x)| (i, x[0])).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    ensure(
        (1.9..=2.1).contains(&peak),
        format!("exits X' at t = {:.5}, but max x1 = {peak:.4} at t = {:.3} is outside [1.9, 2.1]", ev.time, traj.times[k]),
    )?;
    Ok(format!("exits X' at t = {:.5}, max x1 = {peak:.4}", ev.time))
}

/// The reference excursion point lies on the raw trajectory.
fn criterion_7b_point() -> Outcome {
    let traj = raw_run(1e-5)?;
    let point = v(&[2.015, -0.5005, -0.0531]);
    let (k, d) = traj.states.iter().enumerate().map(|(i, x)| (i, (x - &point).norm())).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    ensure(d < 1e-3, format!("closest approach to (2.015, -0.5005, -0.0531) is {d:.2e}"))?;
    Ok(format!("passes within {d:.1e} of (2.015, -0.5005, -0.0531) at t = {:.4}", traj.times[k]))
}

fn criterion_7c() -> Outcome {
    let fx = fixtures::example6();
    let outer = fx.x_outer.clone().ok_or("no outer set")?;
    let req = fx.steer.clone().ok_or("no request")?;
    let cert = check_ribc(&fx.system, &fx.x, &outer, &Candidates { x1: fx.x1.clone(), x2: fx.x2.clone() }, &opts()).map_err(e)?;
    ensure(cert.verdict == RibcVerdict::Certified, format!("verdict {}", cert.verdict.label()))?;
    let origin = cert.equilibrium.clone().ok_or("no equilibrium")?;
    let plan = ribc_steering_plan(
        &fx.system,
        &fx.x,
        &outer,
        cert.x1.as_ref().ok_or("no X1")?,
        cert.x2.as_ref().ok_or("no X2")?,
        &origin,
        &req.x,
        &req.y,
        req.rho,
        &opts(),
    )
    .map_err(e)?;
    ensure(plan.phases.len() == 3, format!("{} phases", plan.phases.len()))?;
    let rep = verify_plan(&plan, &outer, plan.dt).map_err(e)?;
    ensure(rep.contained, format!("plan leaves X' in phase {:?}", rep.violation.as_ref().map(|(k, _)| *k)))?;
    for ph in &rep.phases {
        for x in &ph.trajectory.states {
            ensure(outer.max_facet_value(x) < 0.0, format!("state {x:?} of phase {} not in the open box", ph.label))?;
        }
    }
    ensure(rep.endpoint_error <= plan.rho_prime, format!("endpoint error {:e} > rho' {:e}", rep.endpoint_error, plan.rho_prime))?;
    Ok(format!("contained, endpoint error {:.1e} <= rho' {:.1e}, T = {:.2} s, M = {:.4}", rep.endpoint_error, plan.rho_prime, rep.total_time(), rep.max_control_norm))
}

fn criterion_7() -> Vec<(&'static str, &'static str, Outcome)> {
    let t0 = Instant::now();
    let mut out = vec![
        ("7a", "circuit ellipsoids re-validate", criterion_7a()),
        ("7b", "raw Gramian max x1 in [1.9, 2.1]", criterion_7b()),
        ("7b'", "raw Gramian passes the reference point", criterion_7b_point()),
        ("7c", "composite plan contained", criterion_7c()),
    ];
    let elapsed = t0.elapsed();
    out.push(("7t", "circuit criteria under 60 s", within(elapsed, 60.0).map(|_| format!("{:.2} s", elapsed.as_secs_f64()))));
    out
}

fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Option<AffineSystem> {
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
    let b = Matrix::from_fn(n, m, |_, _| rng.random_range(-2.0..2.0));
    AffineSystem::linear(a, b).ok()
}

fn boundary_sample(rng: &mut ChaCha8Rng, p: &Polytope) -> Vector {
    let f = &p.facets()[rng.random_range(0..p.facets().len())];
    let w: Vec<f64> = f.vertices.iter().map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    f.vertices.iter().zip(&w).fold(Vector::zeros(p.dim()), |acc, (&i, &c)| acc + &p.vertices()[i] * (c / total))
}

fn criterion_8a() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let square = Polytope::from_box(&[-1.0; 2], &[1.0; 2]).map_err(e)?;
    let cube = Polytope::from_box(&[-1.0; 3], &[1.0; 3]).map_err(e)?;
    let (mut systems, mut samples, mut draws) = (0, 0, 0);
    while systems < 20 {
        draws += 1;
        ensure(draws < 5000, format!("only {systems} vertex-solvable systems in {draws} draws"))?;
        let (n, m, p) = if draws % 2 == 0 { (2, 1, &square) } else { (3, 2, &cube) };
        let Some(sys) = random_system(&mut rng, n, m) else { continue };
        let dir = if rng.random_bool(0.5) { Direction::Forward } else { Direction::Backward };
        if !check_invariance(&sys, p, dir, 0.0, U_BOX).map_err(e)?.solvable {
            continue;
        }
        systems += 1;
        for _ in 0..50 {
            let x = boundary_sample(&mut rng, p);
            let cone = p.tangent_cone(&x).map_err(e)?;
            let sol = cone_lp(&sys, &cone.normals, &x, dir, 0.0, U_BOX).map_err(e)?;
            ensure(sol.control.is_some(), format!("boundary point {x:?} has no admissible input"))?;
            samples += 1;
        }
    }
    Ok(format!("{systems} vertex-solvable systems, {samples} boundary samples, 0 counterexamples"))
}

/// RK4 endpoint with the step halved until successive endpoints differ by < 1e-7.
fn reference_endpoint(sys: &AffineSystem, law: &ControlLaw, x: &Vector, t_f: f64) -> Result<Vector, String> {
    let mut dt = t_f / 100.0;
    let mut prev = integrate(sys, law, x, &Stop::at(t_f), dt, &[]).map_err(e)?.endpoint().clone();
    while dt > 1e-6 {
        dt *= 0.5;
        let next = integrate(sys, law, x, &Stop::at(t_f), dt, &[]).map_err(e)?.endpoint().clone();
        if (&next - &prev).norm() < 1e-7 {
            return Ok(next);
        }
        prev = next;
    }
    Err("step halving did not settle".into())
}

fn criterion_8b() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let systems = [fixtures::double_integrator(), fixtures::skewed_double_integrator(), fixtures::cart(1.0, 1.0), fixtures::circuit(), BalanceParams::default().system()];
    let mut worst = 0.0f64;
    for k in 0..50 {
        let sys = &systems[k % systems.len()];
        let x = Vector::from_fn(sys.n(), |_, _| rng.random_range(-1.0..1.0));
        let y = Vector::from_fn(sys.n(), |_, _| rng.random_range(-1.0..1.0));
        let t_f = rng.random_range(0.5..2.0);
        let law = gramian_steer(sys, &x, &y, t_f).map_err(e)?;
        let end = reference_endpoint(sys, &law, &x, t_f)?;
        let err = (end - &y).norm() / (1.0 + y.norm());
        ensure(err <= 1e-5, format!("task {k}: relative endpoint error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("50 tasks, worst relative endpoint error {worst:.1e}"))
}

fn criterion_8c() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..6);
        let mut a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let t = 2.0;
        let scale = a.norm() * t;
        if scale > 5.0 {
            a *= 5.0 / scale;
        }
        let x0 = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let sys = AffineSystem::new(a.clone(), Matrix::zeros(n, 0), Vector::zeros(n)).map_err(e)?;
        let traj = integrate(&sys, &ControlLaw::Zero { m: 0 }, &x0, &Stop::at(t), DEFAULT_DT, &[]).map_err(e)?;
        let exact = expm(&(a * t)).map_err(e)? * &x0;
        let err = (traj.endpoint() - exact).norm();
        ensure(err <= 1e-7, format!("ODE and expm differ by {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("50 random systems, worst disagreement {worst:.1e}"))
}

fn criterion_8d() -> Outcome {
    let hexagon = Polytope::from_vertices(&(0..6).map(|k| {
        let th = k as f64 * std::f64::consts::PI / 3.0;
        v(&[th.cos(), th.sin()])
    }).collect::<Vec<_>>())
    .map_err(e)?;
    let cases = vec![
        (fixtures::skewed_double_integrator(), fixtures::square(), Direction::Forward),
        (AffineSystem::linear(Matrix::from_row_slice(2, 2, &[0.5, 1.0, -1.0, 0.5]), Matrix::identity(2, 2)).map_err(e)?, hexagon, Direction::Forward),
        (AffineSystem::linear(fixtures::circuit().a, Matrix::identity(3, 3)).map_err(e)?, Polytope::from_box(&[-1.0; 3], &[1.0; 3]).map_err(e)?, Direction::Backward),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut runs = 0;
    for (sys, p, dir) in &cases {
        let oriented = dir.oriented(sys);
        let controls = strict_vertex_controls(sys, p, *dir, U_BOX).map_err(e)?;
        let law = ControlLaw::Pwa(pwa_feedback(&oriented, p, Direction::Forward, &Vector::zeros(p.dim()), &Vector::zeros(sys.m()), &controls).map_err(e)?);
        let horizon = 10.0 / sys.a.norm().max(1e-3);
        let mon = Monitor::new("X1", MonitorSet::Polytope(p.clone()), MonitorMode::Closed, MonitorAction::Abort);
        for _ in 0..(500 / cases.len() + 1) {
            let w: Vec<f64> = p.vertices().iter().map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            let x0 = p.vertices().iter().zip(&w).fold(Vector::zeros(p.dim()), |acc, (q, c)| acc + q * (c / total));
            let traj = integrate(&oriented, &law, &x0, &Stop::at(horizon), 1e-2, std::slice::from_ref(&mon)).map_err(e)?;
            ensure(!traj.aborted, format!("closed loop leaves the set from {x0:?}"))?;
            runs += 1;
        }
    }
    ensure(runs >= 500, format!("only {runs} runs"))?;
    Ok(format!("{runs} closed-loop runs on {} sets, 0 exits", cases.len()))
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture; filters are not supported
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let t0 = Instant::now();
    let mut results: Vec<(&str, &str, Outcome)> = vec![
        ("1", "backward LP infeasible at (1,-1), not-IBC", criterion_1()),
        ("2", "lambda > 1.8 over the horizon grid", criterion_2()),
        ("3", "skewed integrator certified through 2.5X", criterion_3()),
        ("4", "case C with the user hexagon", criterion_4()),
        ("5", "cart: not-IBC, 0.8-box certified", criterion_5()),
        ("6", "balance system obstructed by beta", criterion_6()),
    ];
    results.extend(criterion_7());
    results.extend([
        ("8a", "vertex solvability implies boundary solvability", criterion_8a()),
        ("8b", "Gramian endpoint accuracy 1e-5", criterion_8b()),
        ("8c", "ODE agrees with expm to 1e-7", criterion_8c()),
        ("8d", "PWA closed-loop invariance", criterion_8d()),
    ]);
    let mut failed = 0;
    for (id, name, r) in &results {
        match r {
            Ok(detail) => println!("PASS {id:<4} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:<4} {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed, {:.2} s", results.len() - failed, t0.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
