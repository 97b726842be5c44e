//! Machine-readable reports. Witness sets use the problem-file schema so a
//! report's `X1`/`X2` can be pasted back into a problem and re-checked.

use ribc_core::certify::{BetaCertificate, IbcReport, InvarianceReport, RibcCertificate};
use ribc_core::construct::{InvariantCandidate, WitnessSet};
use ribc_core::sim::PlanReport;
use ribc_core::steer::SteeringPlan;
use ribc_core::{Matrix, Vector};
use serde::Serialize;

use crate::problem::{Rows, SetSpec};

pub fn vec_of(v: &Vector) -> Vec<f64> {
    v.as_slice().to_vec()
}

pub fn rows_of(m: &Matrix) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexWitness {
    pub vertex: Vec<f64>,
    pub control: Option<Vec<f64>>,
    /// Best achievable `max_j h_j·(field)` over the input box.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceWitness {
    pub direction: &'static str,
    pub margin: f64,
    pub solvable: bool,
    pub vertices: Vec<VertexWitness>,
}

impl From<&InvarianceReport> for InvarianceWitness {
    fn from(r: &InvarianceReport) -> Self {
        Self {
            direction: r.direction.label(),
            margin: r.margin,
            solvable: r.solvable,
            vertices: r
                .vertices
                .iter()
                .map(|o| VertexWitness { vertex: vec_of(&o.vertex), control: o.control.as_ref().map(vec_of), residual: o.residual })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SetReport {
    pub kind: &'static str,
    pub direction: &'static str,
    pub provenance: String,
    #[serde(flatten)]
    pub set: SetSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceWitness>,
}

pub fn set_spec(w: &WitnessSet) -> SetSpec {
    match w {
        WitnessSet::Polytope(p) => SetSpec { vertices: Some(p.vertices().iter().map(vec_of).collect()), ..SetSpec::default() },
        WitnessSet::Ellipsoid(e) => SetSpec {
            p: Some(rows_of(&e.p)),
            c: Some(e.level),
            k: Some(rows_of(&e.k)),
            center: Some(vec_of(&e.center)),
            u_bar: Some(vec_of(&e.u_bar)),
            ..SetSpec::default()
        },
    }
}

impl From<&InvariantCandidate> for SetReport {
    fn from(c: &InvariantCandidate) -> Self {
        Self {
            kind: c.set.kind(),
            direction: c.direction.label(),
            provenance: c.provenance.describe(),
            set: set_spec(&c.set),
            invariance: c.report.as_ref().map(InvarianceWitness::from),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaReport {
    pub beta: Vec<f64>,
    pub vertex_values: Vec<f64>,
    pub score: f64,
}

impl From<&BetaCertificate> for BetaReport {
    fn from(b: &BetaCertificate) -> Self {
        Self { beta: vec_of(&b.beta), vertex_values: b.vertex_values.clone(), score: b.score }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Witnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward: Option<InvarianceWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backward: Option<InvarianceWitness>,
    #[serde(rename = "X1", skip_serializing_if = "Option::is_none")]
    pub x1: Option<SetReport>,
    #[serde(rename = "X2", skip_serializing_if = "Option::is_none")]
    pub x2: Option<SetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intersection: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseSummary {
    pub label: String,
    pub law: &'static str,
    pub start: f64,
    pub duration: f64,
    pub end_state: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub phase: String,
    pub time: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteerReport {
    pub mode: &'static str,
    pub contained: bool,
    pub start: Vec<f64>,
    pub target: Vec<f64>,
    pub endpoint: Vec<f64>,
    pub endpoint_error: f64,
    pub rho: f64,
    pub rho_prime: f64,
    /// Largest sampled `‖u‖` along the executed plan.
    #[serde(rename = "M")]
    pub bound: f64,
    pub total_time: f64,
    pub violation: Option<Violation>,
    pub phases: Vec<PhaseSummary>,
    pub notes: Vec<String>,
    /// Largest coordinate excursion `max |x_i|` over the run.
    pub peak: Vec<f64>,
}

impl SteerReport {
    pub fn new(mode: &'static str, plan: &SteeringPlan, run: &PlanReport) -> Self {
        let n = plan.start.len();
        let mut peak = vec![0.0f64; n];
        for ph in &run.phases {
            for x in &ph.trajectory.states {
                for i in 0..n {
                    peak[i] = peak[i].max(x[i].abs());
                }
            }
        }
        Self {
            mode,
            contained: run.contained,
            start: vec_of(&plan.start),
            target: vec_of(&plan.target),
            endpoint: vec_of(&run.endpoint),
            endpoint_error: run.endpoint_error,
            rho: plan.rho,
            rho_prime: plan.rho_prime,
            bound: run.max_control_norm,
            total_time: run.total_time(),
            violation: run.violation.as_ref().map(|(k, ev)| Violation { phase: plan.phases[*k].label.clone(), time: run.phases[*k].start + ev.time, state: vec_of(&ev.state) }),
            phases: run
                .phases
                .iter()
                .zip(&plan.phases)
                .map(|(r, p)| PhaseSummary { label: r.label.clone(), law: p.law.kind(), start: r.start, duration: r.duration, end_state: vec_of(r.trajectory.endpoint()) })
                .collect(),
            notes: plan.notes.clone(),
            peak,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub controllability_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<Vec<f64>>,
    pub witnesses: Witnesses,
    pub gates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_estimate: Option<f64>,
    pub trace: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steer: Option<SteerReport>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn from_ibc(r: &IbcReport, exit_code: i32) -> Self {
        Self {
            command: "check-ibc".into(),
            verdict: r.verdict.label().into(),
            exit_code,
            case: None,
            controllability_rank: r.controllability_rank,
            equilibrium: r.equilibrium.as_ref().map(vec_of),
            witnesses: Witnesses {
                forward: r.forward.as_ref().map(InvarianceWitness::from),
                backward: r.backward.as_ref().map(InvarianceWitness::from),
                beta: r.beta.as_ref().map(BetaReport::from),
                ..Witnesses::default()
            },
            gates: Vec::new(),
            bound_estimate: None,
            trace: r.trace.clone(),
            warnings: Vec::new(),
            steer: None,
            artifacts: Vec::new(),
        }
    }

    pub fn from_ribc(c: &RibcCertificate, exit_code: i32) -> Self {
        Self {
            command: "check-ribc".into(),
            verdict: c.verdict.label().into(),
            exit_code,
            case: Some(c.case.kind.label().into()),
            controllability_rank: c.controllability_rank,
            equilibrium: c.equilibrium.as_ref().map(vec_of),
            witnesses: Witnesses {
                x1: c.x1.as_ref().map(SetReport::from),
                x2: c.x2.as_ref().map(SetReport::from),
                beta: c.beta.as_ref().map(BetaReport::from),
                intersection: c.intersection_witness.as_ref().map(vec_of),
                ..Witnesses::default()
            },
            gates: c.gates.iter().flat_map(|(a, b)| [a.label().to_string(), b.label().to_string()]).collect(),
            bound_estimate: c.bound_estimate,
            trace: c.trace.clone(),
            warnings: c.warnings.clone(),
            steer: None,
            artifacts: Vec::new(),
        }
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, self.verdict);
        if let Some(c) = &self.case {
            out.push_str(&format!("case: {c}\n"));
        }
        for (name, w) in [("forward", &self.witnesses.forward), ("backward", &self.witnesses.backward)] {
            if let Some(w) = w {
                out.push_str(&format!("{name} invariance: {}\n", if w.solvable { "solvable" } else { "fails" }));
                for v in &w.vertices {
                    let u = v.control.as_ref().map_or("none".to_string(), |u| fmt(u));
                    out.push_str(&format!("  vertex {}  u = {u}  residual {:.6}\n", fmt(&v.vertex), v.residual));
                }
            }
        }
        for (name, s) in [("X1", &self.witnesses.x1), ("X2", &self.witnesses.x2)] {
            if let Some(s) = s {
                out.push_str(&format!("{name}: {} ({})\n", s.kind, s.provenance));
            }
        }
        if let Some(b) = &self.witnesses.beta {
            out.push_str(&format!("beta: {}\n", fmt(&b.beta)));
        }
        if let Some(p) = &self.witnesses.intersection {
            out.push_str(&format!("common equilibrium: {}\n", fmt(p)));
        }
        if !self.gates.is_empty() {
            out.push_str(&format!("gates: {}\n", self.gates.join(", ")));
        }
        if let Some(s) = &self.steer {
            out.push_str(&format!(
                "steer ({}): contained = {}, endpoint error {:.3e}, M = {:.6}, T = {:.4}\n",
                s.mode, s.contained, s.endpoint_error, s.bound, s.total_time
            ));
            for p in &s.phases {
                out.push_str(&format!("  {} [{}] t = {:.4} + {:.4}\n", p.label, p.law, p.start, p.duration));
            }
            if let Some(v) = &s.violation {
                out.push_str(&format!("  leaves X' in phase {} at t = {:.6}, x = {}\n", v.phase, v.time, fmt(&v.state)));
            }
        }
        for t in &self.trace {
            out.push_str(&format!("- {t}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for a in &self.artifacts {
            out.push_str(&format!("wrote {a}\n"));
        }
        out
    }
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}
