//! Polytopes in dual vertex/facet form and the queries the certifier needs.

mod hull;
mod simplex;

pub use simplex::Simplex;

use crate::error::{Error, Result};
use crate::numerics::lp::{lp_solve, LpProblem, LpStatus};
use crate::{Matrix, Vector};

/// Absolute tolerance on unit-normalized facet rows.
pub const GEOM_TOL: f64 = 1e-9;

/// Facet `{x : normal·x = offset}` with the interior on `normal·x < offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
    /// Indices into [`Polytope::vertices`].
    pub vertices: Vec<usize>,
}

impl Facet {
    /// `normal·x - offset`; negative inside.
    pub fn value(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Containment {
    Closed,
    Open,
    /// `normal·x <= offset - ε` on every facet.
    Margin(f64),
}

/// Active facets at a boundary point; the cone is `{y : h_j·y <= 0, j ∈ active}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCone {
    pub active: Vec<usize>,
    pub normals: Vec<Vector>,
}

impl TangentCone {
    pub fn is_interior(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, y: &Vector, tol: f64) -> bool {
        self.normals.iter().all(|h| h.dot(y) <= tol)
    }
}

/// Result of maximizing the minimum facet slack over an affine set.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineIntersection {
    /// True when the affine set meets the open polytope.
    pub intersects: bool,
    /// Best achievable minimum slack (may be negative).
    pub slack: f64,
    /// Maximizer of the minimum slack on the affine set.
    pub witness: Vector,
}

/// Full-dimensional convex polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector>,
    facets: Vec<Facet>,
}

fn dedup_points(points: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - p).amax() <= GEOM_TOL) {
            out.push(p.clone());
        }
    }
    out
}

impl Polytope {
    /// Convex hull of `points`; non-extreme points are dropped.
    pub fn from_vertices(points: &[Vector]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Dimension("polytope needs at least one point".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::Dimension("points must have positive dimension".into()));
        }
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Dimension("points have inconsistent dimensions".into()));
        }
        if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::Input("polytope points must be finite".into()));
        }
        let pts = dedup_points(points);
        let all: Vec<usize> = (0..pts.len()).collect();
        if hull::affine_rank(&pts, &all) < n {
            return Err(Error::Dimension(format!("points do not span an {n}-dimensional affine hull")));
        }
        let keep = hull::extreme_points(&pts)?;
        let vertices: Vec<Vector> = keep.into_iter().map(|i| pts[i].clone()).collect();
        let facets = hull::enumerate_facets(&vertices)?
            .into_iter()
            .map(|f| Facet { normal: f.normal, offset: f.offset, vertices: f.incident })
            .collect();
        Ok(Self { vertices, facets })
    }

    /// Axis-aligned box `[lo_i, hi_i]`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Dimension("box bounds must have equal positive length".into()));
        }
        let n = lo.len();
        let pts: Vec<Vector> = (0..1usize << n)
            .map(|mask| Vector::from_fn(n, |i, _| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }))
            .collect();
        Self::from_vertices(&pts)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn centroid(&self) -> Vector {
        let n = self.dim();
        self.vertices.iter().fold(Vector::zeros(n), |acc, v| acc + v) / self.vertices.len() as f64
    }

    /// Index of the vertex equal to `x` (within tolerance), if any.
    pub fn vertex_index(&self, x: &Vector) -> Option<usize> {
        self.vertices.iter().position(|v| (v - x).amax() <= GEOM_TOL)
    }

    /// Largest facet value `max_i (h_i·x − c_i)`; `<= 0` inside.
    pub fn max_facet_value(&self, x: &Vector) -> f64 {
        self.facets.iter().map(|f| f.value(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &Vector, mode: Containment) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let worst = self.max_facet_value(x);
        match mode {
            Containment::Closed => worst <= GEOM_TOL,
            Containment::Open => worst < -GEOM_TOL,
            Containment::Margin(eps) => worst <= -eps,
        }
    }

    /// Closed containment of every vertex of `other`.
    pub fn contains_polytope(&self, other: &Polytope) -> bool {
        other.vertices.iter().all(|v| self.contains(v, Containment::Closed))
    }

    pub fn tangent_cone(&self, x: &Vector) -> Result<TangentCone> {
        if !self.contains(x, Containment::Closed) {
            return Err(Error::Domain("tangent cone requested at a point outside the polytope".into()));
        }
        let active: Vec<usize> = (0..self.facets.len()).filter(|&j| self.facets[j].value(x).abs() <= GEOM_TOL).collect();
        let normals = active.iter().map(|&j| self.facets[j].normal.clone()).collect();
        Ok(TangentCone { active, normals })
    }

    /// `λP`; normals unchanged, offsets scaled.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Input(format!("scale factor must be positive, got {lambda}")));
        }
        Ok(Self {
            vertices: self.vertices.iter().map(|v| v * lambda).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet { normal: f.normal.clone(), offset: f.offset * lambda, vertices: f.vertices.clone() })
                .collect(),
        })
    }

    /// `P + shift`.
    pub fn translate(&self, shift: &Vector) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + shift).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet { normal: f.normal.clone(), offset: f.offset + f.normal.dot(shift), vertices: f.vertices.clone() })
                .collect(),
        }
    }

    pub fn is_simplicial(&self) -> bool {
        let n = self.dim();
        self.facets.iter().all(|f| f.vertices.len() == n)
    }

    /// Minkowski gauge `min{λ >= 0 : x ∈ λP}`; needs the origin in the interior.
    pub fn gauge(&self, x: &Vector) -> Result<f64> {
        if self.facets.iter().any(|f| f.offset <= GEOM_TOL) {
            return Err(Error::Domain("gauge needs the origin in the interior".into()));
        }
        Ok(self.facets.iter().map(|f| f.normal.dot(x) / f.offset).fold(0.0, f64::max))
    }

    /// Hull volume from a pulling triangulation.
    pub fn volume(&self) -> f64 {
        simplex::pulling_triangulation(&self.vertices)
            .iter()
            .map(|s| Simplex::new(s.iter().map(|&i| self.vertices[i].clone()).collect()).volume())
            .sum()
    }

    /// Simplices `co(facet piece ∪ {apex})`; non-simplicial facets are fan
    /// triangulated from their lowest-index vertex first.
    pub fn star_triangulate(&self, apex: &Vector) -> Result<Vec<Simplex>> {
        if !self.contains(apex, Containment::Open) {
            return Err(Error::Domain("star triangulation apex must be interior".into()));
        }
        let mut out = Vec::new();
        for facet in &self.facets {
            for piece in simplex::triangulate_facet(&self.vertices, facet) {
                let mut pts: Vec<Vector> = piece.iter().map(|&i| self.vertices[i].clone()).collect();
                pts.push(apex.clone());
                out.push(Simplex::new(pts));
            }
        }
        Ok(out)
    }

    /// Does `{base + D z}` meet the open polytope?
    pub fn intersects_affine_open(&self, base: &Vector, directions: &Matrix) -> Result<AffineIntersection> {
        let halfspaces: Vec<(Vector, f64)> = self.facets.iter().map(|f| (f.normal.clone(), f.offset)).collect();
        max_min_slack(&halfspaces, base, directions)
    }
}

/// Maximize `s` over `z` subject to `h_i·(base + D z) + s <= c_i` for all
/// halfspaces. The maximizer is a Chebyshev-style centre along the affine set.
pub fn max_min_slack(halfspaces: &[(Vector, f64)], base: &Vector, directions: &Matrix) -> Result<AffineIntersection> {
    let n = base.len();
    if directions.nrows() != n && directions.ncols() > 0 {
        return Err(Error::Dimension("affine directions must live in the ambient space".into()));
    }
    if halfspaces.is_empty() {
        return Err(Error::Input("no halfspaces given".into()));
    }
    let k = directions.ncols();
    let mut g = Matrix::zeros(halfspaces.len(), k + 1);
    let mut rhs = Vector::zeros(halfspaces.len());
    for (i, (h, c)) in halfspaces.iter().enumerate() {
        for j in 0..k {
            g[(i, j)] = h.dot(&directions.column(j));
        }
        g[(i, k)] = 1.0;
        rhs[i] = c - h.dot(base);
    }
    let mut obj = Vector::zeros(k + 1);
    obj[k] = -1.0;
    let out = lp_solve(&LpProblem::new(obj, g, rhs)?)?;
    match out.status {
        LpStatus::Optimal => {
            let sol = out.point.expect("optimal point");
            let z = sol.rows(0, k).into_owned();
            let witness = if k > 0 { base + directions * z } else { base.clone() };
            let slack = sol[k];
            Ok(AffineIntersection { intersects: slack > GEOM_TOL, slack, witness })
        }
        LpStatus::Unbounded => Err(Error::Domain("halfspace system is unbounded along the affine set".into())),
        LpStatus::Infeasible => Err(Error::Numerical("slack LP cannot be infeasible".into())),
    }
}

#[cfg(test)]
mod tests;
