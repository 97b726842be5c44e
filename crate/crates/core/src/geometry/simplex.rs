//! Simplices and triangulations by pulling the lowest-index vertex.

use super::hull::{enumerate_facets, hyperplane_basis};
use super::{Facet, GEOM_TOL};
use crate::numerics::linalg::solve;
use crate::{Matrix, Vector};

/// `n`-simplex given by `n + 1` affinely independent vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vector>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vector>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    fn edge_matrix(&self) -> Matrix {
        let n = self.dim();
        let v0 = &self.vertices[0];
        Matrix::from_fn(n, n, |r, c| self.vertices[c + 1][r] - v0[r])
    }

    /// Barycentric coordinates of `x`; `None` for a degenerate simplex.
    pub fn barycentric(&self, x: &Vector) -> Option<Vector> {
        let n = self.dim();
        let rhs = Matrix::from_column_slice(n, 1, (x - &self.vertices[0]).as_slice());
        let mu = solve(&self.edge_matrix(), &rhs).ok()?;
        let mut out = Vector::zeros(n + 1);
        out[0] = 1.0 - mu.sum();
        for i in 0..n {
            out[i + 1] = mu[(i, 0)];
        }
        Some(out)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.barycentric(x).is_some_and(|l| l.min() >= -tol)
    }

    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.edge_matrix().determinant().abs() / fact
    }
}

/// Triangulation of the hull of `points` (all extreme, full-dimensional in
/// their ambient space) as index lists. Each cell joins the lowest-index
/// point with a triangulated facet not containing it.
pub(crate) fn pulling_triangulation(points: &[Vector]) -> Vec<Vec<usize>> {
    let n = points[0].len();
    if n == 1 {
        let lo = (0..points.len()).min_by(|&a, &b| points[a][0].total_cmp(&points[b][0])).expect("points");
        let hi = (0..points.len()).max_by(|&a, &b| points[a][0].total_cmp(&points[b][0])).expect("points");
        let mut cell = vec![lo, hi];
        cell.sort_unstable();
        return vec![cell];
    }
    let facets = enumerate_facets(points).expect("valid point set");
    let mut out = Vec::new();
    for f in facets {
        if (f.normal.dot(&points[0]) - f.offset).abs() <= GEOM_TOL {
            continue;
        }
        for mut piece in triangulate_hyperplane(points, &f.normal, &f.incident) {
            piece.insert(0, 0);
            out.push(piece);
        }
    }
    out
}

fn triangulate_hyperplane(points: &[Vector], normal: &Vector, incident: &[usize]) -> Vec<Vec<usize>> {
    if points[0].len() == 1 {
        return vec![incident.to_vec()];
    }
    let basis = hyperplane_basis(normal);
    let origin = &points[incident[0]];
    let local: Vec<Vector> = incident.iter().map(|&j| basis.transpose() * (&points[j] - origin)).collect();
    pulling_triangulation(&local)
        .into_iter()
        .map(|cell| cell.into_iter().map(|l| incident[l]).collect())
        .collect()
}

/// Split a facet into `(n-1)`-simplices, returned as vertex index lists.
pub(crate) fn triangulate_facet(vertices: &[Vector], facet: &Facet) -> Vec<Vec<usize>> {
    let n = vertices[0].len();
    if facet.vertices.len() == n {
        return vec![facet.vertices.clone()];
    }
    triangulate_hyperplane(vertices, &facet.normal, &facet.vertices)
}
