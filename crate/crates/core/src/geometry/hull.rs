//! Facet enumeration for full-dimensional point sets.
//!
//! Dimensions up to four use brute force over vertex subsets; higher
//! dimensions use gift-wrapping across ridges, where ridges come from a
//! recursive enumeration inside each facet hyperplane.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GEOM_TOL;
use crate::error::{Error, Result};
use crate::numerics::linalg::{kernel, rank, RANK_TOL};
use crate::numerics::lp::{lp_solve, LpProblem, LpStatus};
use crate::{Matrix, Vector};

/// Supporting hyperplane `normal·x = offset` and the indices of the points on it.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawFacet {
    pub normal: Vector,
    pub offset: f64,
    pub incident: Vec<usize>,
}

const BRUTE_FORCE_MAX_DIM: usize = 4;

pub(crate) fn affine_rank(points: &[Vector], idx: &[usize]) -> usize {
    if idx.len() < 2 {
        return 0;
    }
    let base = &points[idx[0]];
    let n = base.len();
    let diffs = Matrix::from_fn(idx.len() - 1, n, |r, c| points[idx[r + 1]][c] - base[c]);
    rank(&diffs, RANK_TOL).unwrap_or(0)
}

/// Indices of the points that are extreme (not convex combinations of the rest).
pub(crate) fn extreme_points(points: &[Vector]) -> Result<Vec<usize>> {
    let p = points.len();
    let n = points[0].len();
    let mut keep = Vec::new();
    for i in 0..p {
        let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
        if others.is_empty() {
            keep.push(i);
            continue;
        }
        // λ >= 0, Σλ = 1, Σ λ_j p_j = p_i as paired inequalities
        let k = others.len();
        let rows = k + 2 * (n + 1);
        let mut g = Matrix::zeros(rows, k);
        let mut b = Vector::zeros(rows);
        for j in 0..k {
            g[(j, j)] = -1.0;
        }
        for c in 0..n {
            for (j, &o) in others.iter().enumerate() {
                g[(k + 2 * c, j)] = points[o][c];
                g[(k + 2 * c + 1, j)] = -points[o][c];
            }
            b[k + 2 * c] = points[i][c];
            b[k + 2 * c + 1] = -points[i][c];
        }
        for j in 0..k {
            g[(k + 2 * n, j)] = 1.0;
            g[(k + 2 * n + 1, j)] = -1.0;
        }
        b[k + 2 * n] = 1.0;
        b[k + 2 * n + 1] = -1.0;
        let out = lp_solve(&LpProblem::feasibility(g, b)?)?;
        if out.status == LpStatus::Infeasible {
            keep.push(i);
        }
    }
    Ok(keep)
}

fn supporting_facet(points: &[Vector], normal: Vector) -> Option<RawFacet> {
    let nrm = normal.norm();
    if nrm < 1e-14 {
        return None;
    }
    let normal = normal / nrm;
    let values: Vec<f64> = points.iter().map(|p| normal.dot(p)).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let incident: Vec<usize> = (0..points.len()).filter(|&j| (values[j] - max).abs() <= GEOM_TOL).collect();
    Some(RawFacet { normal, offset: max, incident })
}

fn brute_force(points: &[Vector]) -> Vec<RawFacet> {
    let n = points[0].len();
    let p = points.len();
    let mut found: BTreeMap<Vec<usize>, RawFacet> = BTreeMap::new();
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        if affine_rank(points, &combo) == n - 1 {
            let base = &points[combo[0]];
            let diffs = Matrix::from_fn(n - 1, n, |r, c| points[combo[r + 1]][c] - base[c]);
            if let Ok(k) = kernel(&diffs, RANK_TOL) {
                if k.ncols() == 1 {
                    let h: Vector = k.column(0).into_owned();
                    let c = h.dot(base);
                    let vals: Vec<f64> = points.iter().map(|q| h.dot(q) - c).collect();
                    let sign = if vals.iter().all(|&v| v <= GEOM_TOL) {
                        Some(1.0)
                    } else if vals.iter().all(|&v| v >= -GEOM_TOL) {
                        Some(-1.0)
                    } else {
                        None
                    };
                    if let Some(s) = sign {
                        if let Some(f) = supporting_facet(points, h * s) {
                            found.entry(f.incident.clone()).or_insert(f);
                        }
                    }
                }
            }
        }
        // next n-combination of 0..p in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return found.into_values().collect();
            }
            i -= 1;
            if combo[i] < p - n + i {
                combo[i] += 1;
                for j in i + 1..n {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn one_dimensional(points: &[Vector]) -> Vec<RawFacet> {
    let hi = supporting_facet(points, Vector::from_element(1, 1.0)).expect("unit normal");
    let lo = supporting_facet(points, Vector::from_element(1, -1.0)).expect("unit normal");
    vec![lo, hi]
}

/// Orthonormal basis of the hyperplane `normal⊥` as `n x (n-1)` columns.
pub(crate) fn hyperplane_basis(normal: &Vector) -> Matrix {
    let row = Matrix::from_row_slice(1, normal.len(), normal.as_slice());
    kernel(&row, RANK_TOL).expect("positive tolerance")
}

fn initial_facet(points: &[Vector]) -> Result<RawFacet> {
    let n = points[0].len();
    let centroid = points.iter().fold(Vector::zeros(n), |acc, p| acc + p) / points.len() as f64;
    let g = Matrix::from_fn(points.len(), n, |r, c| points[r][c] - centroid[c]);
    let rhs = Vector::from_element(points.len(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0xfacE7);
    for _ in 0..16 {
        let obj = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let out = lp_solve(&LpProblem::new(-obj, g.clone(), rhs.clone())?)?;
        let Some(y) = out.point else { continue };
        if let Some(f) = supporting_facet(points, y) {
            if affine_rank(points, &f.incident) == n - 1 {
                return Ok(f);
            }
        }
    }
    Err(Error::Numerical("could not locate an initial facet".into()))
}

fn gift_wrap(points: &[Vector]) -> Result<Vec<RawFacet>> {
    let n = points[0].len();
    let first = initial_facet(points)?;
    let mut found: BTreeMap<Vec<usize>, RawFacet> = BTreeMap::new();
    let mut queue = VecDeque::new();
    found.insert(first.incident.clone(), first.clone());
    queue.push_back(first);
    while let Some(facet) = queue.pop_front() {
        let basis = hyperplane_basis(&facet.normal);
        let origin = &points[facet.incident[0]];
        let local: Vec<Vector> = facet.incident.iter().map(|&j| basis.transpose() * (&points[j] - origin)).collect();
        for ridge in enumerate_facets(&local)? {
            let e_in = -(&basis * &ridge.normal);
            let ridge_pts: Vec<usize> = ridge.incident.iter().map(|&l| facet.incident[l]).collect();
            let r0 = &points[ridge_pts[0]];
            let mut best: Option<f64> = None;
            for (j, w) in points.iter().enumerate() {
                if facet.incident.contains(&j) {
                    continue;
                }
                let q = w - r0;
                let a = facet.normal.dot(&q);
                let b = e_in.dot(&q);
                let phi = (-a).atan2(b);
                best = Some(best.map_or(phi, |bp: f64| bp.max(phi)));
            }
            let Some(phi) = best else { continue };
            let normal = -(&e_in * phi.sin()) - &facet.normal * phi.cos();
            let Some(next) = supporting_facet(points, normal) else { continue };
            if affine_rank(points, &next.incident) != n - 1 {
                return Err(Error::Numerical("gift-wrapping produced a degenerate facet".into()));
            }
            if !found.contains_key(&next.incident) {
                found.insert(next.incident.clone(), next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(found.into_values().collect())
}

/// Facets of the hull of `points`, which must all be extreme and span
/// their ambient dimension.
pub(crate) fn enumerate_facets(points: &[Vector]) -> Result<Vec<RawFacet>> {
    let n = points.first().map(|p| p.len()).unwrap_or(0);
    match n {
        0 => Err(Error::Dimension("zero-dimensional point set".into())),
        1 => Ok(one_dimensional(points)),
        d if d <= BRUTE_FORCE_MAX_DIM => Ok(brute_force(points)),
        _ => gift_wrap(points),
    }
}

#[cfg(test)]
pub(crate) fn enumerate_facets_brute(points: &[Vector]) -> Vec<RawFacet> {
    brute_force(points)
}

#[cfg(test)]
pub(crate) fn enumerate_facets_wrap(points: &[Vector]) -> Result<Vec<RawFacet>> {
    gift_wrap(points)
}
