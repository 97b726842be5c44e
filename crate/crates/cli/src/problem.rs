//! Problem files: JSON schema, parsing and validation.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ribc_core::certify::{CertifyOptions, Direction};
use ribc_core::construct::{Ellipsoid, WitnessSet};
use ribc_core::fixtures::{Fixture, SteerRequest};
use ribc_core::geometry::Polytope;
use ribc_core::system::{check_nesting, AffineSystem};
use ribc_core::{Matrix, Vector};
use serde::{Deserialize, Serialize};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "a", default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    pub vertices: Rows,
}

/// Candidate set: either `vertices`, or an ellipsoid `P`, `c` with optional
/// gain `K`, `center` and equilibrium input `u_bar`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Rows>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_bar: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteerSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default = "default_t_f")]
    pub t_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

fn default_t_f() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_box: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub system: SystemSpec,
    #[serde(rename = "X")]
    pub x: VertexSet,
    #[serde(rename = "Xprime", default, skip_serializing_if = "Option::is_none")]
    pub x_outer: Option<VertexSet>,
    #[serde(rename = "X1", default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<SetSpec>,
    #[serde(rename = "X2", default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steer: Option<SteerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// Validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: AffineSystem,
    pub x: Polytope,
    pub x_outer: Option<Polytope>,
    pub x1: Option<WitnessSet>,
    pub x2: Option<WitnessSet>,
    pub steer: Option<SteerRequest>,
    pub opts: CertifyOptions,
}

pub fn parse_str(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| anyhow!("parse error at line {}, column {}: {e}", e.line(), e.column()))
}

pub fn parse_problem(path: &Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_str(&text).with_context(|| format!("{}", path.display()))
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    parse_problem(path)?.validate()
}

fn matrix(field: &str, rows: &Rows, nrows: usize, ncols: Option<usize>) -> Result<Matrix> {
    if rows.len() != nrows {
        bail!("{field}: expected {nrows} rows, got {}", rows.len());
    }
    let cols = ncols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            bail!("{field}: row {} has {} entries, expected {cols}", i + 1, r.len());
        }
    }
    Ok(Matrix::from_fn(nrows, cols, |i, j| rows[i][j]))
}

fn vector(field: &str, xs: &[f64], n: usize) -> Result<Vector> {
    if xs.len() != n {
        bail!("{field}: expected {n} entries, got {}", xs.len());
    }
    Ok(Vector::from_row_slice(xs))
}

fn polytope(field: &str, rows: &Rows, n: usize) -> Result<Polytope> {
    if rows.is_empty() {
        bail!("{field}: no vertices");
    }
    let pts = rows.iter().enumerate().map(|(i, r)| vector(&format!("{field}.vertices[{i}]"), r, n)).collect::<Result<Vec<_>>>()?;
    Polytope::from_vertices(&pts).map_err(|e| anyhow!("{field}: {e}"))
}

fn witness(field: &str, spec: &SetSpec, sys: &AffineSystem, direction: Direction) -> Result<WitnessSet> {
    let n = sys.n();
    if let Some(v) = &spec.vertices {
        return Ok(WitnessSet::Polytope(polytope(field, v, n)?));
    }
    let (Some(p), Some(c)) = (&spec.p, spec.c) else {
        bail!("{field}: needs either `vertices` or both `P` and `c`");
    };
    let p = matrix(&format!("{field}.P"), p, n, Some(n))?;
    if !(c > 0.0) {
        bail!("{field}.c: level must be positive");
    }
    let center = match &spec.center {
        Some(x) => vector(&format!("{field}.center"), x, n)?,
        None => Vector::zeros(n),
    };
    // without a gain, use the Riccati form K = ∓BᵀP
    let k = match &spec.k {
        Some(k) => matrix(&format!("{field}.K"), k, sys.m(), Some(n))?,
        None => -(sys.b.transpose() * &p) * direction.sign(),
    };
    let u_bar = match &spec.u_bar {
        Some(u) => vector(&format!("{field}.u_bar"), u, sys.m())?,
        None => sys.equilibrium_input(&center).map_err(|e| anyhow!("{field}.center: {e}"))?,
    };
    Ok(WitnessSet::Ellipsoid(Ellipsoid { p, level: c, k, center, u_bar, direction }))
}

impl ProblemFile {
    pub fn validate(&self) -> Result<Problem> {
        let n = self.system.a.len();
        if n == 0 {
            bail!("system.A: empty matrix");
        }
        let a = matrix("system.A", &self.system.a, n, Some(n))?;
        let b = matrix("system.B", &self.system.b, n, None)?;
        let offset = match &self.system.offset {
            Some(o) => vector("system.a", o, n)?,
            None => Vector::zeros(n),
        };
        let system = AffineSystem::new(a, b, offset).map_err(|e| anyhow!("system.B: {e}"))?;
        let x = polytope("X", &self.x.vertices, n)?;
        let x_outer = match &self.x_outer {
            Some(v) => {
                let p = polytope("Xprime", &v.vertices, n)?;
                check_nesting(&x, &p).map_err(|e| anyhow!("Xprime: {e}"))?;
                Some(p)
            }
            None => None,
        };
        let x1 = self.x1.as_ref().map(|s| witness("X1", s, &system, Direction::Forward)).transpose()?;
        let x2 = self.x2.as_ref().map(|s| witness("X2", s, &system, Direction::Backward)).transpose()?;
        let steer = match &self.steer {
            Some(s) => {
                if !(s.t_f > 0.0) {
                    bail!("steer.t_f: must be positive");
                }
                Some(SteerRequest { x: vector("steer.x", &s.x, n)?, y: vector("steer.y", &s.y, n)?, t_f: s.t_f, rho: s.rho })
            }
            None => None,
        };
        let mut opts = CertifyOptions::default();
        if let Some(t) = &self.tolerances {
            apply(&mut opts, t);
        }
        Ok(Problem { system, x, x_outer, x1, x2, steer, opts })
    }

    pub fn from_fixture(fx: &Fixture) -> Self {
        let rows = |m: &Matrix| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect::<Rows>();
        let verts = |p: &Polytope| VertexSet { vertices: p.vertices().iter().map(|v| v.as_slice().to_vec()).collect() };
        let set = |w: &WitnessSet| match w {
            WitnessSet::Polytope(p) => SetSpec { vertices: Some(verts(p).vertices), ..SetSpec::default() },
            WitnessSet::Ellipsoid(e) => SetSpec {
                p: Some(rows(&e.p)),
                c: Some(e.level),
                k: Some(rows(&e.k)),
                center: Some(e.center.as_slice().to_vec()),
                u_bar: Some(e.u_bar.as_slice().to_vec()),
                ..SetSpec::default()
            },
        };
        let sys = &fx.system;
        ProblemFile {
            system: SystemSpec { a: rows(&sys.a), b: rows(&sys.b), offset: Some(sys.offset.as_slice().to_vec()) },
            x: verts(&fx.x),
            x_outer: fx.x_outer.as_ref().map(verts),
            x1: fx.x1.as_ref().map(set),
            x2: fx.x2.as_ref().map(set),
            steer: fx.steer.as_ref().map(|s| SteerSpec { x: s.x.as_slice().to_vec(), y: s.y.as_slice().to_vec(), t_f: s.t_f, rho: s.rho }),
            tolerances: None,
        }
    }
}

pub fn apply(opts: &mut CertifyOptions, t: &Tolerances) {
    if let Some(v) = t.tol {
        opts.tol = v;
    }
    if let Some(v) = t.margin {
        opts.strict_margin = Some(v);
    }
    if let Some(v) = t.u_box {
        opts.u_box = v;
    }
    if let Some(v) = t.alpha {
        opts.alpha = v;
    }
}
