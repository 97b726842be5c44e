//! Forward- and backward-invariant witness sets between the inner and
//! outer polytopes: the original polytope, an extension of it along the
//! equilibrium set, and sublevel sets of quadratic Lyapunov functions.

use crate::certify::{check_invariance, common_equilibrium, fmt_vec, sufficiency_gate, CertifyOptions, Direction, InvarianceReport};
use crate::error::{Error, Result};
use crate::geometry::{Containment, Polytope, GEOM_TOL};
use crate::numerics::linalg::{inverse, least_squares, rank, symmetric_eigenvalues, RANK_TOL};
use crate::numerics::lyapunov::{lyapunov_derivative, quadratic_form};
use crate::numerics::{solve_lyapunov, solve_riccati, stabilize, stabilize_with_margin, POLE_MARGIN};
use crate::system::{AffineSystem, CaseKind, GeometricCase};
use crate::{Matrix, Vector};

pub const ALPHA_START: f64 = 1.5;
pub const ALPHA_HALVINGS: usize = 20;
/// Margins tried after the Riccati gain fails containment.
const POLE_RETRIES: usize = 4;
/// Largest eigenvalue allowed for the closed-loop Lyapunov derivative.
pub const DERIVATIVE_TOL: f64 = -1e-9;

/// `{x : (x − center)ᵀ P (x − center) <= level}` with feedback
/// `u = ū + K (x − center)` rendering it invariant in `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub p: Matrix,
    pub level: f64,
    pub k: Matrix,
    pub center: Vector,
    pub u_bar: Vector,
    pub direction: Direction,
}

impl Ellipsoid {
    pub fn value(&self, x: &Vector) -> f64 {
        quadratic_form(&self.p, &(x - &self.center))
    }

    pub fn contains(&self, x: &Vector, mode: Containment) -> bool {
        let v = self.value(x);
        match mode {
            Containment::Closed => v <= self.level + GEOM_TOL,
            Containment::Open => v < self.level - GEOM_TOL,
            Containment::Margin(eps) => v <= self.level - eps,
        }
    }

    /// `max h·x` over the ellipsoid.
    pub fn support(&self, h: &Vector) -> Result<f64> {
        let pinv = inverse(&self.p)?;
        Ok(h.dot(&self.center) + (self.level * quadratic_form(&pinv, h)).max(0.0).sqrt())
    }

    pub fn inside(&self, outer: &Polytope) -> Result<bool> {
        for f in outer.facets() {
            if self.support(&f.normal)? > f.offset + GEOM_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn control(&self, x: &Vector) -> Vector {
        &self.u_bar + &self.k * (x - &self.center)
    }

    /// Closed-loop matrix of the oriented flow.
    pub fn closed_loop(&self, sys: &AffineSystem) -> Matrix {
        (&sys.a + &sys.b * &self.k) * self.direction.sign()
    }

    pub fn derivative_max_eigenvalue(&self, sys: &AffineSystem) -> f64 {
        let d = lyapunov_derivative(&self.closed_loop(sys), &self.p);
        symmetric_eigenvalues(&((&d + d.transpose()) * 0.5)).last().copied().unwrap_or(f64::NAN)
    }

    /// Boundary points `center + √level · L⁻ᵀ z` for unit `z` along the given directions.
    pub fn boundary_point(&self, z: &Vector) -> Result<Vector> {
        let chol = nalgebra::Cholesky::new(self.p.clone()).ok_or_else(|| Error::Numerical("P is not positive definite".into()))?;
        let l = chol.l();
        let lt_inv = inverse(&l.transpose())?;
        let zn = z / z.norm();
        Ok(&self.center + lt_inv * zn * self.level.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessSet {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
}

impl WitnessSet {
    pub fn contains(&self, x: &Vector, mode: Containment) -> bool {
        match self {
            WitnessSet::Polytope(p) => p.contains(x, mode),
            WitnessSet::Ellipsoid(e) => e.contains(x, mode),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WitnessSet::Polytope(_) => "polytope",
            WitnessSet::Ellipsoid(_) => "ellipsoid",
        }
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            WitnessSet::Polytope(p) => Some(p),
            WitnessSet::Ellipsoid(_) => None,
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match self {
            WitnessSet::Ellipsoid(e) => Some(e),
            WitnessSet::Polytope(_) => None,
        }
    }
}

/// How a candidate was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    UserSupplied,
    InnerPolytope,
    Extension { alpha: f64, added: Vec<Vector> },
    Riccati,
    PolePlacement { margin: f64 },
}

impl Provenance {
    pub fn describe(&self) -> String {
        match self {
            Provenance::UserSupplied => "user-supplied set".into(),
            Provenance::InnerPolytope => "X itself is invariant".into(),
            Provenance::Extension { alpha, added } => {
                let pts: Vec<String> = added.iter().map(fmt_vec).collect();
                format!("X extended along the equilibrium set (alpha {alpha}) by {}", pts.join(", "))
            }
            Provenance::Riccati => "Lyapunov ellipsoid from the LQR Riccati solution".into(),
            Provenance::PolePlacement { margin } => format!("Lyapunov ellipsoid from pole placement (margin {margin})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCandidate {
    pub set: WitnessSet,
    pub direction: Direction,
    pub provenance: Provenance,
    /// Vertex LP report for polytope sets.
    pub report: Option<InvarianceReport>,
}

impl InvariantCandidate {
    /// Largest control norm among witnesses (vertex controls, or the
    /// feedback over the ellipsoid).
    pub fn bound_estimate(&self) -> f64 {
        match (&self.set, &self.report) {
            (_, Some(r)) => r.max_control_norm(),
            (WitnessSet::Ellipsoid(e), None) => {
                // max ‖ū + K d‖ over dᵀPd <= c is at most ‖ū‖ + √c ‖K L⁻ᵀ‖
                let Some(chol) = nalgebra::Cholesky::new(e.p.clone()) else { return f64::INFINITY };
                let Ok(lt_inv) = inverse(&chol.l().transpose()) else { return f64::INFINITY };
                let gain = (&e.k * lt_inv).norm();
                e.u_bar.norm() + e.level.sqrt() * gain
            }
            (WitnessSet::Polytope(_), None) => f64::INFINITY,
        }
    }
}

fn fail(msg: impl Into<String>) -> Error {
    Error::ConstructionFailed(msg.into())
}

/// Re-validate a supplied set: nesting `X ⊆ set ⊆ X′` and invariance in `direction`.
pub fn validate_candidate(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    set: &WitnessSet,
    direction: Direction,
    opts: &CertifyOptions,
) -> Result<InvariantCandidate> {
    match set {
        WitnessSet::Polytope(p) => {
            if p.dim() != sys.n() {
                return Err(Error::Dimension("candidate dimension does not match the system".into()));
            }
            if !p.contains_polytope(x) {
                return Err(fail("candidate does not contain X"));
            }
            if !x_outer.contains_polytope(p) {
                return Err(fail("candidate is not contained in X'"));
            }
            let rep = check_invariance(sys, p, direction, 0.0, opts.u_box)?;
            if !rep.solvable {
                return Err(fail(format!("{} invariance fails at vertices {:?}", direction.label(), rep.failing())));
            }
            Ok(InvariantCandidate { set: set.clone(), direction, provenance: Provenance::UserSupplied, report: Some(rep) })
        }
        WitnessSet::Ellipsoid(e) => {
            if e.direction != direction {
                return Err(fail(format!("ellipsoid is built for the {} direction", e.direction.label())));
            }
            check_ellipsoid(sys, x, x_outer, e)?;
            Ok(InvariantCandidate { set: set.clone(), direction, provenance: Provenance::UserSupplied, report: None })
        }
    }
}

/// Positive definiteness, equilibrium center, `X ⊆ E ⊆ X′` and a negative
/// definite Lyapunov derivative along the oriented closed loop.
pub fn check_ellipsoid(sys: &AffineSystem, x: &Polytope, x_outer: &Polytope, e: &Ellipsoid) -> Result<()> {
    let n = sys.n();
    if e.p.nrows() != n || e.p.ncols() != n || e.k.nrows() != sys.m() || e.k.ncols() != n || e.center.len() != n {
        return Err(Error::Dimension("ellipsoid data has inconsistent dimensions".into()));
    }
    if (&e.p - e.p.transpose()).amax() > 1e-9 * (1.0 + e.p.amax()) {
        return Err(fail("P is not symmetric"));
    }
    let eig_min = symmetric_eigenvalues(&e.p).first().copied().unwrap_or(f64::NAN);
    if !(eig_min > 0.0) {
        return Err(fail(format!("P is not positive definite (smallest eigenvalue {eig_min:.3e})")));
    }
    if !(e.level > 0.0) {
        return Err(fail("ellipsoid level must be positive"));
    }
    let resid = (sys.field(&e.center, &e.u_bar)).norm();
    if resid > 1e-9 * (1.0 + sys.a.norm() * e.center.norm()) {
        return Err(fail("ellipsoid center is not an equilibrium under u_bar"));
    }
    if let Some(v) = x.vertices().iter().find(|v| !e.contains(v, Containment::Closed)) {
        return Err(fail(format!("vertex {} of X lies outside the ellipsoid", fmt_vec(v))));
    }
    if !e.inside(x_outer)? {
        return Err(fail("ellipsoid is not contained in X'"));
    }
    let d = e.derivative_max_eigenvalue(sys);
    if !(d <= DERIVATIVE_TOL) {
        return Err(fail(format!("Lyapunov derivative is not negative definite (largest eigenvalue {d:.3e})")));
    }
    Ok(())
}

/// Decompose `w = o + b` with `o ∈ span(E)`, `b ∈ Im B` (minimum norm).
fn split_along(e: &Matrix, b: &Matrix, w: &Vector) -> Result<(Vector, Vector)> {
    let k = e.ncols();
    let m = b.ncols();
    let n = w.len();
    let stacked = Matrix::from_fn(n, k + m, |r, c| if c < k { e[(r, c)] } else { b[(r, c - k)] });
    let coef = least_squares(&stacked, w)?;
    let o = e * coef.rows(0, k);
    let bb = b * coef.rows(k, m);
    Ok((o, bb))
}

/// Extend `X` by pushing the equilibrium-set component of every failing
/// vertex outward by `α` (about `center`), shrinking `α` toward one until
/// the hull stays strictly inside `X′` and is invariant.
pub fn extend_polytope_along_o(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    center: &Vector,
    direction: Direction,
    alpha0: f64,
    opts: &CertifyOptions,
) -> Result<InvariantCandidate> {
    if !(alpha0 > 1.0) {
        return Err(Error::Input(format!("extension factor must exceed 1, got {alpha0}")));
    }
    let n = sys.n();
    let eq = sys.equilibrium_set();
    if !eq.nonempty {
        return Err(Error::Precondition("equilibrium set is empty".into()));
    }
    let span = Matrix::from_fn(n, eq.dim() + sys.m(), |r, c| if c < eq.dim() { eq.basis[(r, c)] } else { sys.b[(r, c - eq.dim())] });
    if rank(&span, RANK_TOL)? < n {
        return Err(Error::Precondition("equilibrium set and input image do not span the state space".into()));
    }
    let base = check_invariance(sys, x, direction, 0.0, opts.u_box)?;
    if base.solvable {
        return Ok(InvariantCandidate { set: WitnessSet::Polytope(x.clone()), direction, provenance: Provenance::InnerPolytope, report: Some(base) });
    }
    let mut offsets = Vec::new();
    for i in base.failing() {
        let w = &x.vertices()[i] - center;
        let (o, _) = split_along(&eq.basis, &sys.b, &w)?;
        offsets.push(o);
    }
    let mut alpha = alpha0;
    for _ in 0..=ALPHA_HALVINGS {
        let added: Vec<Vector> = offsets.iter().map(|o| center + o * alpha).collect();
        if added.iter().all(|p| x_outer.contains(p, Containment::Open)) {
            let mut pts = x.vertices().to_vec();
            pts.extend(added.iter().cloned());
            let cand = Polytope::from_vertices(&pts)?;
            let inner_points_ok = offsets.iter().all(|o| cand.contains(&(center + o), Containment::Open));
            if inner_points_ok && x_outer.contains_polytope(&cand) {
                let rep = check_invariance(sys, &cand, direction, 0.0, opts.u_box)?;
                if rep.solvable {
                    return Ok(InvariantCandidate {
                        set: WitnessSet::Polytope(cand),
                        direction,
                        provenance: Provenance::Extension { alpha, added },
                        report: Some(rep),
                    });
                }
            }
        }
        alpha = 1.0 + (alpha - 1.0) / 2.0;
    }
    Err(fail(format!("no extension factor in (1, {alpha0}] gives an invariant polytope inside X'")))
}

fn ellipsoid_from(sys: &AffineSystem, x: &Polytope, center: &Vector, u_bar: &Vector, p: Matrix, k: Matrix, direction: Direction) -> Ellipsoid {
    let p = (&p + p.transpose()) * 0.5;
    let level = x.vertices().iter().map(|v| quadratic_form(&p, &(v - center))).fold(0.0, f64::max);
    let _ = sys;
    Ellipsoid { p, level, k, center: center.clone(), u_bar: u_bar.clone(), direction }
}

/// Sublevel set of a closed-loop Lyapunov function about `center`, scaled to
/// just contain `X`; tries the LQR gain first, then pole placement with
/// growing margins.
pub fn ellipsoid_invariant(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    center: &Vector,
    direction: Direction,
) -> Result<InvariantCandidate> {
    let (lin, u_bar) = sys.translate_to_linear(center)?;
    let oriented = direction.oriented(&lin);
    let n = sys.n();
    let m = sys.m();
    let mut tried: Vec<(Matrix, Matrix, Provenance)> = Vec::new();
    if let Ok(k0) = stabilize(&oriented.a, &oriented.b) {
        if let Ok((p, k)) = solve_riccati(&oriented.a, &oriented.b, &Matrix::identity(n, n), &Matrix::identity(m, m), &k0) {
            tried.push((p, k, Provenance::Riccati));
        }
    }
    let mut margin = POLE_MARGIN;
    for _ in 0..=POLE_RETRIES {
        if let Ok(k) = stabilize_with_margin(&oriented.a, &oriented.b, margin) {
            let a_cl = &oriented.a + &oriented.b * &k;
            if let Ok(p) = solve_lyapunov(&a_cl, &Matrix::identity(n, n)) {
                tried.push((p, k, Provenance::PolePlacement { margin }));
            }
        }
        margin *= 2.0;
    }
    let mut last = String::from("no stabilizing gain available");
    for (p, k, provenance) in tried {
        let e = ellipsoid_from(sys, x, center, &u_bar, p, k, direction);
        match check_ellipsoid(sys, x, x_outer, &e) {
            Ok(()) => return Ok(InvariantCandidate { set: WitnessSet::Ellipsoid(e), direction, provenance, report: None }),
            Err(err) => last = err.to_string(),
        }
    }
    Err(fail(format!("no Lyapunov ellipsoid fits inside X' ({last})")))
}

/// First valid witness in the order: `X` itself, extension along 𝒪,
/// Lyapunov ellipsoid. A candidate passing a sufficiency gate is preferred
/// over an earlier one that only passes the necessary conditions.
pub fn search_direction(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    center: &Vector,
    direction: Direction,
    opts: &CertifyOptions,
) -> Result<InvariantCandidate> {
    let mut fallback: Option<InvariantCandidate> = None;
    let mut errors: Vec<String> = Vec::new();
    let inner = || -> Result<InvariantCandidate> {
        let rep = check_invariance(sys, x, direction, 0.0, opts.u_box)?;
        if !rep.solvable {
            return Err(fail(format!("X fails {} invariance at vertices {:?}", direction.label(), rep.failing())));
        }
        Ok(InvariantCandidate { set: WitnessSet::Polytope(x.clone()), direction, provenance: Provenance::InnerPolytope, report: Some(rep) })
    };
    let routes: [&dyn Fn() -> Result<InvariantCandidate>; 3] = [
        &inner,
        &|| extend_polytope_along_o(sys, x, x_outer, center, direction, opts.alpha, opts),
        &|| ellipsoid_invariant(sys, x, x_outer, center, direction),
    ];
    for route in routes {
        match route() {
            Ok(c) => {
                if sufficiency_gate(sys, &c, center, opts)?.is_some() {
                    return Ok(c);
                }
                fallback.get_or_insert(c);
            }
            Err(e @ (Error::ConstructionFailed(_) | Error::Precondition(_) | Error::Domain(_))) => errors.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    if let Some(c) = fallback {
        return Ok(c);
    }
    Err(fail(format!("{} search exhausted: {}", direction.label(), errors.join("; "))))
}

/// Witness pair for cases B and C; case C also needs a common interior
/// equilibrium.
pub fn search_candidates(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    case: &GeometricCase,
    opts: &CertifyOptions,
) -> Result<(InvariantCandidate, InvariantCandidate)> {
    let center = match case.kind {
        CaseKind::A => return Err(Error::Precondition("no equilibrium inside X': nothing to search".into())),
        CaseKind::B => case.inner_witness.clone(),
        CaseKind::C => case.outer_witness.clone(),
    }
    .ok_or_else(|| Error::Precondition("case witness missing".into()))?;
    let x1 = search_direction(sys, x, x_outer, &center, Direction::Forward, opts)?;
    let x2 = search_direction(sys, x, x_outer, &center, Direction::Backward, opts)?;
    if case.kind == CaseKind::C && common_equilibrium(sys, &x1.set, &x2.set, opts.tol)?.is_none() {
        return Err(fail("witness interiors share no equilibrium"));
    }
    Ok((x1, x2))
}
