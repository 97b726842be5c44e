//! Verdicts: vertex invariance LPs, in-block controllability on a single
//! polytope, relaxed in-block controllability through a larger polytope and
//! the obstruction certificate for the case where no equilibrium is
//! available inside the outer polytope.

use crate::construct::{self, InvariantCandidate, WitnessSet};
use crate::error::{Error, Result};
use crate::geometry::{max_min_slack, Containment, Polytope, GEOM_TOL};
use crate::numerics::lp::{lp_solve, LpProblem, LpStatus};
use crate::system::{classify_case, AffineSystem, CaseKind, GeometricCase, KalmanDecomposition};
use crate::{Matrix, Vector};

/// Default box on each input component inside the vertex LPs.
pub const U_BOX: f64 = 1e3;

/// Strict margin relative to the largest facet offset about the equilibrium.
pub const STRICT_MARGIN_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }

    /// The system whose forward flow this direction describes.
    pub fn oriented(self, sys: &AffineSystem) -> AffineSystem {
        match self {
            Direction::Forward => sys.clone(),
            Direction::Backward => sys.backward(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub u_box: f64,
    /// Overrides the relative strict margin when set (absolute value).
    pub strict_margin: Option<f64>,
    /// Starting scale for extension along the equilibrium set.
    pub alpha: f64,
    /// Decision threshold for slacks and obstruction scores.
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { u_box: U_BOX, strict_margin: None, alpha: construct::ALPHA_START, tol: GEOM_TOL }
    }
}

/// Solution of the cone LP at one boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSolution {
    /// Minimal-∞-norm input meeting the margin, if one exists in the box.
    pub control: Option<Vector>,
    /// `min_u max_j s·h_j·(Ax + Bu + a)` over the box; `<= -margin` when feasible.
    pub residual: f64,
    pub box_active: bool,
}

/// Cone LP at an arbitrary point with the given active normals.
pub fn cone_lp(
    sys: &AffineSystem,
    normals: &[Vector],
    x: &Vector,
    direction: Direction,
    margin: f64,
    u_box: f64,
) -> Result<ConeSolution> {
    let m = sys.m();
    if normals.is_empty() {
        return Ok(ConeSolution { control: Some(Vector::zeros(m)), residual: f64::NEG_INFINITY, box_active: false });
    }
    let s = direction.sign();
    let drift = &sys.a * x + &sys.offset;
    let k = normals.len();
    let hb: Vec<Vector> = normals.iter().map(|h| (sys.b.transpose() * h) * s).collect();
    let hd: Vec<f64> = normals.iter().map(|h| s * h.dot(&drift)).collect();

    // residual: min r s.t. s h_j·(drift + B u) <= r, |u_i| <= u_box
    let mut g = Matrix::zeros(k + 2 * m, m + 1);
    let mut rhs = Vector::zeros(k + 2 * m);
    for j in 0..k {
        for i in 0..m {
            g[(j, i)] = hb[j][i];
        }
        g[(j, m)] = -1.0;
        rhs[j] = -hd[j];
    }
    for i in 0..m {
        g[(k + 2 * i, i)] = 1.0;
        g[(k + 2 * i + 1, i)] = -1.0;
        rhs[k + 2 * i] = u_box;
        rhs[k + 2 * i + 1] = u_box;
    }
    let mut obj = Vector::zeros(m + 1);
    obj[m] = 1.0;
    let res = lp_solve(&LpProblem::new(obj, g, rhs)?)?;
    let residual = match res.status {
        LpStatus::Optimal => res.value.expect("optimal value"),
        _ => return Err(Error::Numerical("cone residual LP must be bounded and feasible".into())),
    };

    // witness: min t s.t. s h_j·(drift + B u) <= -margin, |u_i| <= t <= u_box
    let mut g = Matrix::zeros(k + 2 * m + 1, m + 1);
    let mut rhs = Vector::zeros(k + 2 * m + 1);
    for j in 0..k {
        for i in 0..m {
            g[(j, i)] = hb[j][i];
        }
        rhs[j] = -margin - hd[j];
    }
    for i in 0..m {
        g[(k + 2 * i, i)] = 1.0;
        g[(k + 2 * i, m)] = -1.0;
        g[(k + 2 * i + 1, i)] = -1.0;
        g[(k + 2 * i + 1, m)] = -1.0;
    }
    g[(k + 2 * m, m)] = 1.0;
    rhs[k + 2 * m] = u_box;
    let mut obj = Vector::zeros(m + 1);
    obj[m] = 1.0;
    let out = lp_solve(&LpProblem::new(obj, g, rhs)?)?;
    let control = match out.status {
        LpStatus::Optimal => Some(out.point.expect("optimal point").rows(0, m).into_owned()),
        LpStatus::Infeasible => None,
        LpStatus::Unbounded => return Err(Error::Numerical("minimal-norm witness LP is unbounded".into())),
    };
    let box_active = control.as_ref().is_some_and(|u| u.amax() >= u_box * (1.0 - 1e-9));
    Ok(ConeSolution { control, residual, box_active })
}

/// Outcome of the invariance LP at one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexOutcome {
    pub index: usize,
    pub vertex: Vector,
    pub control: Option<Vector>,
    pub residual: f64,
    pub warning: Option<String>,
}

impl VertexOutcome {
    pub fn feasible(&self) -> bool {
        self.control.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub direction: Direction,
    pub margin: f64,
    pub vertices: Vec<VertexOutcome>,
    pub solvable: bool,
}

impl InvarianceReport {
    pub fn strict(&self) -> bool {
        self.margin > 0.0
    }

    pub fn failing(&self) -> Vec<usize> {
        self.vertices.iter().filter(|o| !o.feasible()).map(|o| o.index).collect()
    }

    /// Largest Euclidean norm among the witness controls.
    pub fn max_control_norm(&self) -> f64 {
        self.vertices.iter().filter_map(|o| o.control.as_ref()).map(|u| u.norm()).fold(0.0, f64::max)
    }

    pub fn controls(&self) -> Option<Vec<Vector>> {
        self.vertices.iter().map(|o| o.control.clone()).collect()
    }
}

/// Invariance LP at vertex `v` of `p`: `h_j·(s(Av + Bu + a)) <= -margin` on
/// the active facets, `|u_i| <= u_box`.
pub fn invariance_lp(
    sys: &AffineSystem,
    p: &Polytope,
    v: &Vector,
    direction: Direction,
    margin: f64,
    u_box: f64,
) -> Result<VertexOutcome> {
    let index = p.vertex_index(v).ok_or_else(|| Error::Input("invariance LP requested at a point that is not a vertex".into()))?;
    vertex_lp(sys, p, index, direction, margin, u_box)
}

fn vertex_lp(sys: &AffineSystem, p: &Polytope, index: usize, direction: Direction, margin: f64, u_box: f64) -> Result<VertexOutcome> {
    if !(margin >= 0.0) || !(u_box > 0.0) {
        return Err(Error::Input("margin must be >= 0 and u_box > 0".into()));
    }
    let vertex = p.vertices()[index].clone();
    let cone = p.tangent_cone(&vertex)?;
    let sol = cone_lp(sys, &cone.normals, &vertex, direction, margin, u_box)?;
    let warning = sol.box_active.then(|| format!("witness at vertex {index} saturates the input box {u_box}"));
    Ok(VertexOutcome { index, vertex, control: sol.control, residual: sol.residual, warning })
}

pub fn check_invariance(sys: &AffineSystem, p: &Polytope, direction: Direction, margin: f64, u_box: f64) -> Result<InvarianceReport> {
    if p.dim() != sys.n() {
        return Err(Error::Dimension("polytope dimension does not match the system".into()));
    }
    let vertices = (0..p.vertices().len()).map(|i| vertex_lp(sys, p, i, direction, margin, u_box)).collect::<Result<Vec<_>>>()?;
    let solvable = vertices.iter().all(VertexOutcome::feasible);
    Ok(InvarianceReport { direction, margin, vertices, solvable })
}

/// Check a supplied set of vertex controls (in vertex order) at margin 0,
/// with tolerance `tol` on unit normals.
pub fn verify_vertex_controls(
    sys: &AffineSystem,
    p: &Polytope,
    direction: Direction,
    controls: &[Vector],
    tol: f64,
) -> Result<Vec<f64>> {
    if controls.len() != p.vertices().len() {
        return Err(Error::Dimension(format!("{} controls for {} vertices", controls.len(), p.vertices().len())));
    }
    let s = direction.sign();
    p.vertices()
        .iter()
        .zip(controls)
        .map(|(v, u)| {
            if u.len() != sys.m() {
                return Err(Error::Dimension("control has wrong length".into()));
            }
            let f = sys.field(v, u) * s;
            let cone = p.tangent_cone(v)?;
            let worst = cone.normals.iter().map(|h| h.dot(&f)).fold(f64::NEG_INFINITY, f64::max);
            Ok(if worst <= tol { worst.min(0.0) } else { worst })
        })
        .collect()
}

/// Relative strict margin for `p` about the point `center`.
pub fn strict_margin(p: &Polytope, center: &Vector) -> f64 {
    let scale = p.facets().iter().map(|f| (f.offset - f.normal.dot(center)).abs()).fold(0.0, f64::max);
    STRICT_MARGIN_REL * scale.max(1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbcVerdict {
    Certified,
    NecessaryConditionsHold,
    NotIbc,
}

impl IbcVerdict {
    pub fn label(self) -> &'static str {
        match self {
            IbcVerdict::Certified => "IBC-certified",
            IbcVerdict::NecessaryConditionsHold => "necessary-conditions-hold",
            IbcVerdict::NotIbc => "not-IBC",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbcReport {
    pub verdict: IbcVerdict,
    pub controllability_rank: usize,
    pub controllable: bool,
    pub simplicial: bool,
    /// Equilibrium in the interior of `X` used as the linear origin.
    pub equilibrium: Option<Vector>,
    pub forward: Option<InvarianceReport>,
    pub backward: Option<InvarianceReport>,
    pub beta: Option<BetaCertificate>,
    pub trace: Vec<String>,
}

pub fn check_ibc(sys: &AffineSystem, x: &Polytope, opts: &CertifyOptions) -> Result<IbcReport> {
    if x.dim() != sys.n() {
        return Err(Error::Dimension("polytope dimension does not match the system".into()));
    }
    let rank = sys.controllability_rank();
    let controllable = rank == sys.n();
    let simplicial = x.is_simplicial();
    let mut trace = Vec::new();
    let eq = sys.equilibrium_set();
    let meet = if eq.nonempty { Some(x.intersects_affine_open(&eq.base, &eq.basis)?) } else { None };
    let equilibrium = meet.as_ref().filter(|m| m.slack > opts.tol).map(|m| m.witness.clone());
    let Some(x_bar) = equilibrium.clone() else {
        trace.push("no equilibrium in the interior of X: the polytope cannot be mutually accessible".into());
        let beta = obstruction_beta(sys, x, opts.tol)?;
        if beta.is_some() {
            trace.push("drift obstruction found over the vertices of X".into());
        }
        return Ok(IbcReport {
            verdict: IbcVerdict::NotIbc,
            controllability_rank: rank,
            controllable,
            simplicial,
            equilibrium: None,
            forward: None,
            backward: None,
            beta,
            trace,
        });
    };
    trace.push(format!("equilibrium {} lies in the interior of X", fmt_vec(&x_bar)));
    if controllable {
        trace.push("(A, B) is controllable".into());
    } else {
        trace.push(format!("(A, B) is not controllable: rank {rank} < {}", sys.n()));
    }
    let forward = check_invariance(sys, x, Direction::Forward, 0.0, opts.u_box)?;
    let backward = check_invariance(sys, x, Direction::Backward, 0.0, opts.u_box)?;
    for rep in [&forward, &backward] {
        if rep.solvable {
            trace.push(format!("{} invariance conditions solvable at every vertex", rep.direction.label()));
        } else {
            for o in rep.vertices.iter().filter(|o| !o.feasible()) {
                trace.push(format!(
                    "{} invariance fails at vertex {} {} (residual {:.6})",
                    rep.direction.label(),
                    o.index,
                    fmt_vec(&o.vertex),
                    o.residual
                ));
            }
        }
    }
    let verdict = if !(controllable && forward.solvable && backward.solvable) {
        IbcVerdict::NotIbc
    } else if simplicial {
        trace.push("X is simplicial: the conditions are sufficient".into());
        IbcVerdict::Certified
    } else {
        trace.push("X is not simplicial: the conditions are only necessary".into());
        IbcVerdict::NecessaryConditionsHold
    };
    Ok(IbcReport {
        verdict,
        controllability_rank: rank,
        controllable,
        simplicial,
        equilibrium: Some(x_bar),
        forward: Some(forward),
        backward: Some(backward),
        beta: None,
        trace,
    })
}

/// Drift direction `β ∈ ker Bᵀ` with `β·(Ax + a) <= 0` at every vertex and
/// `< 0` somewhere, which makes `β·x` strictly decrease on the interior.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaCertificate {
    pub beta: Vector,
    /// `β·(Av + a)` per vertex.
    pub vertex_values: Vec<f64>,
    /// `Σ_v −β·(Av + a)`; positive for a certificate.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaCheck {
    pub kernel_residual: f64,
    pub max_vertex_value: f64,
    pub min_vertex_value: f64,
    pub valid: bool,
}

/// LP search over `β = Nγ`, `‖γ‖_∞ <= 1`, maximizing the summed decrease
/// subject to non-positivity at every vertex.
pub fn obstruction_beta(sys: &AffineSystem, x_outer: &Polytope, tol: f64) -> Result<Option<BetaCertificate>> {
    let nn = sys.annihilator();
    let k = nn.ncols();
    if k == 0 {
        return Ok(None);
    }
    let verts = x_outer.vertices();
    let drifts: Vec<Vector> = verts.iter().map(|v| nn.transpose() * (&sys.a * v + &sys.offset)).collect();
    let rows = verts.len() + 2 * k;
    let mut g = Matrix::zeros(rows, k);
    let mut rhs = Vector::zeros(rows);
    for (r, d) in drifts.iter().enumerate() {
        for c in 0..k {
            g[(r, c)] = d[c];
        }
    }
    for c in 0..k {
        g[(verts.len() + 2 * c, c)] = 1.0;
        g[(verts.len() + 2 * c + 1, c)] = -1.0;
        rhs[verts.len() + 2 * c] = 1.0;
        rhs[verts.len() + 2 * c + 1] = 1.0;
    }
    let obj = drifts.iter().fold(Vector::zeros(k), |acc, d| acc + d);
    let out = lp_solve(&LpProblem::new(obj, g, rhs)?)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::Numerical("obstruction LP must be feasible and bounded".into()));
    }
    let gamma = out.point.expect("optimal point");
    let beta = &nn * &gamma;
    let nrm = beta.amax();
    if nrm < 1e-14 {
        return Ok(None);
    }
    let beta = beta / nrm;
    let check = verify_beta(sys, x_outer, &beta, tol);
    if !check.valid {
        return Ok(None);
    }
    let vertex_values: Vec<f64> = verts.iter().map(|v| beta.dot(&(&sys.a * v + &sys.offset))).collect();
    let score = -vertex_values.iter().sum::<f64>();
    Ok(Some(BetaCertificate { beta, vertex_values, score }))
}

/// Re-check a drift obstruction: `βᵀB = 0`, `β·(Av + a) <= tol` everywhere and
/// `< -tol` at some vertex.
pub fn verify_beta(sys: &AffineSystem, x_outer: &Polytope, beta: &Vector, tol: f64) -> BetaCheck {
    let scale = beta.norm().max(1e-300);
    let kernel_residual = if sys.m() == 0 { 0.0 } else { (sys.b.transpose() * beta).amax() / scale };
    let values: Vec<f64> = x_outer.vertices().iter().map(|v| beta.dot(&(&sys.a * v + &sys.offset)) / scale).collect();
    let max_vertex_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_vertex_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let valid = kernel_residual <= 1e-10 && max_vertex_value <= tol && min_vertex_value < -tol;
    BetaCheck { kernel_residual, max_vertex_value, min_vertex_value, valid }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RibcVerdict {
    NotRibc,
    Certified,
    Inconclusive,
}

impl RibcVerdict {
    pub fn label(self) -> &'static str {
        match self {
            RibcVerdict::NotRibc => "not-RIBC",
            RibcVerdict::Certified => "RIBC-certified",
            RibcVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Which sufficiency condition a witness set passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SufficiencyGate {
    SimplicialPolytope,
    StrictInvariance,
    LyapunovEllipsoid,
}

impl SufficiencyGate {
    pub fn label(self) -> &'static str {
        match self {
            SufficiencyGate::SimplicialPolytope => "simplicial polytope",
            SufficiencyGate::StrictInvariance => "strict invariance margin",
            SufficiencyGate::LyapunovEllipsoid => "Lyapunov ellipsoid",
        }
    }
}

/// Optional user-supplied witness sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Candidates {
    pub x1: Option<WitnessSet>,
    pub x2: Option<WitnessSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RibcCertificate {
    pub verdict: RibcVerdict,
    pub case: GeometricCase,
    pub controllability_rank: usize,
    pub kalman: Option<KalmanDecomposition>,
    pub beta: Option<BetaCertificate>,
    /// Equilibrium used as the linear origin for the witness sets.
    pub equilibrium: Option<Vector>,
    pub x1: Option<InvariantCandidate>,
    pub x2: Option<InvariantCandidate>,
    pub gates: Option<(SufficiencyGate, SufficiencyGate)>,
    /// Point of 𝒪 inside both witness interiors (required in the outer-only case).
    pub intersection_witness: Option<Vector>,
    /// Largest witness control norm (estimate of the input bound).
    pub bound_estimate: Option<f64>,
    pub trace: Vec<String>,
    pub warnings: Vec<String>,
}

pub(crate) fn fmt_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

/// Gate a validated candidate passes, if any.
pub fn sufficiency_gate(sys: &AffineSystem, cand: &InvariantCandidate, center: &Vector, opts: &CertifyOptions) -> Result<Option<SufficiencyGate>> {
    match &cand.set {
        WitnessSet::Ellipsoid(_) => Ok(Some(SufficiencyGate::LyapunovEllipsoid)),
        WitnessSet::Polytope(p) => {
            if p.is_simplicial() {
                return Ok(Some(SufficiencyGate::SimplicialPolytope));
            }
            let margin = opts.strict_margin.unwrap_or_else(|| strict_margin(p, center));
            let rep = check_invariance(sys, p, cand.direction, margin, opts.u_box)?;
            Ok(rep.solvable.then_some(SufficiencyGate::StrictInvariance))
        }
    }
}

/// Point of 𝒪 in the interior of both sets, maximizing the smallest slack.
pub fn common_equilibrium(sys: &AffineSystem, x1: &WitnessSet, x2: &WitnessSet, tol: f64) -> Result<Option<Vector>> {
    let eq = sys.equilibrium_set();
    if !eq.nonempty {
        return Ok(None);
    }
    let mut halfspaces: Vec<(Vector, f64)> = Vec::new();
    let mut ellipsoids = Vec::new();
    for set in [x1, x2] {
        match set {
            WitnessSet::Polytope(p) => halfspaces.extend(p.facets().iter().map(|f| (f.normal.clone(), f.offset))),
            WitnessSet::Ellipsoid(e) => ellipsoids.push(e),
        }
    }
    let point = if halfspaces.is_empty() {
        ellipsoids[0].center.clone()
    } else {
        let r = max_min_slack(&halfspaces, &eq.base, &eq.basis)?;
        if r.slack <= tol {
            return Ok(None);
        }
        r.witness
    };
    if !eq.contains(&point, 1e-9 * (1.0 + point.norm())) {
        return Ok(None);
    }
    let inside = [x1, x2].iter().all(|s| s.contains(&point, Containment::Open));
    Ok(inside.then_some(point))
}

/// Relaxed in-block controllability of `sys` w.r.t. `x` through `x_outer`.
pub fn check_ribc(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    candidates: &Candidates,
    opts: &CertifyOptions,
) -> Result<RibcCertificate> {
    let case = classify_case(sys, x, x_outer)?;
    let rank = sys.controllability_rank();
    let mut cert = RibcCertificate {
        verdict: RibcVerdict::Inconclusive,
        case: case.clone(),
        controllability_rank: rank,
        kalman: None,
        beta: None,
        equilibrium: None,
        x1: None,
        x2: None,
        gates: None,
        intersection_witness: None,
        bound_estimate: None,
        trace: Vec::new(),
        warnings: case.warnings.clone(),
    };
    cert.trace.push(format!("geometric case {}", case.kind.label()));

    if case.kind == CaseKind::A {
        cert.trace.push("equilibrium set misses the interior of X': no trajectory can hover inside".into());
        cert.beta = obstruction_beta(sys, x_outer, opts.tol)?;
        match &cert.beta {
            Some(b) => {
                cert.trace.push(format!("drift obstruction beta = {} decreases beta·x on the interior of X'", fmt_vec(&b.beta)));
                cert.verdict = RibcVerdict::NotRibc;
            }
            None => cert.trace.push("no drift obstruction found by the vertex LP; verdict left open".into()),
        }
        return Ok(cert);
    }

    if rank < sys.n() {
        let kd = sys.kalman_decomposition()?;
        let modes: Vec<String> = kd.modes.iter().map(|m| format!("{:.4}{:+.4}i ({})", m.value.re, m.value.im, m.kind.label())).collect();
        cert.trace.push(format!("(A, B) is not controllable: rank {rank} < {}; uncontrollable modes [{}]", sys.n(), modes.join(", ")));
        cert.kalman = Some(kd);
        cert.verdict = RibcVerdict::NotRibc;
        return Ok(cert);
    }
    cert.trace.push("(A, B) is controllable".into());

    let center = match case.kind {
        CaseKind::B => case.inner_witness.clone().expect("inner witness"),
        _ => case.outer_witness.clone().expect("outer witness"),
    };

    let forward = pick_candidate(sys, x, x_outer, &center, Direction::Forward, candidates.x1.as_ref(), opts, &mut cert.trace);
    let backward = pick_candidate(sys, x, x_outer, &center, Direction::Backward, candidates.x2.as_ref(), opts, &mut cert.trace);
    let (x1, x2) = match (forward, backward) {
        (Ok(a), Ok(b)) => (a, b),
        (f, b) => {
            for e in [f.err(), b.err()].into_iter().flatten() {
                cert.trace.push(format!("witness construction failed: {e}"));
            }
            return Ok(cert);
        }
    };

    let common = common_equilibrium(sys, &x1.set, &x2.set, opts.tol)?;
    match (&common, case.kind) {
        (Some(p), _) => cert.trace.push(format!("equilibrium {} lies in the interior of both witness sets", fmt_vec(p))),
        (None, CaseKind::C) => {
            cert.trace.push("witness interiors share no equilibrium".into());
            cert.x1 = Some(x1);
            cert.x2 = Some(x2);
            return Ok(cert);
        }
        (None, _) => {}
    }
    cert.intersection_witness = common.clone();
    let origin = match case.kind {
        CaseKind::C => common.clone().expect("checked above"),
        _ => center.clone(),
    };
    cert.equilibrium = Some(origin.clone());

    let g1 = sufficiency_gate(sys, &x1, &origin, opts)?;
    let g2 = sufficiency_gate(sys, &x2, &origin, opts)?;
    cert.bound_estimate = Some(x1.bound_estimate().max(x2.bound_estimate()));
    for (g, c) in [(g1, &x1), (g2, &x2)] {
        match g {
            Some(g) => cert.trace.push(format!("{} set passes the {} sufficiency gate", c.direction.label(), g.label())),
            None => cert.trace.push(format!(
                "{} set fails every sufficiency gate (not simplicial, no strict margin, not an ellipsoid)",
                c.direction.label()
            )),
        }
    }
    cert.x1 = Some(x1);
    cert.x2 = Some(x2);
    if let (Some(g1), Some(g2)) = (g1, g2) {
        cert.gates = Some((g1, g2));
        cert.verdict = RibcVerdict::Certified;
    }
    Ok(cert)
}

#[allow(clippy::too_many_arguments)]
fn pick_candidate(
    sys: &AffineSystem,
    x: &Polytope,
    x_outer: &Polytope,
    center: &Vector,
    direction: Direction,
    user: Option<&WitnessSet>,
    opts: &CertifyOptions,
    trace: &mut Vec<String>,
) -> Result<InvariantCandidate> {
    if let Some(set) = user {
        match construct::validate_candidate(sys, x, x_outer, set, direction, opts) {
            Ok(c) => {
                trace.push(format!("{} witness: user-supplied set validates", direction.label()));
                return Ok(c);
            }
            Err(e) => trace.push(format!("{} witness: user-supplied set rejected ({e}); searching", direction.label())),
        }
    }
    let c = construct::search_direction(sys, x, x_outer, center, direction, opts)?;
    trace.push(format!("{} witness: {}", direction.label(), c.provenance.describe()));
    Ok(c)
}
