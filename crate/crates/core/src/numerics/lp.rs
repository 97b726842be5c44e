//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problems in this toolkit are tiny (a handful of free variables and at
//! most a few dozen inequality rows), so a dense tableau is the simplest
//! thing that is exact enough. All variables are free; they are split
//! into positive and negative parts internally.

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Feasibility tolerance on unit-normalized constraint rows.
pub const LP_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

/// `minimize objective·x` subject to `constraints·x <= rhs`, x free.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vector,
    pub constraints: Matrix,
    pub rhs: Vector,
}

impl LpProblem {
    pub fn new(objective: Vector, constraints: Matrix, rhs: Vector) -> Result<Self> {
        if constraints.ncols() != objective.len() {
            return Err(Error::Dimension(format!(
                "constraint matrix has {} columns but objective has {} entries",
                constraints.ncols(),
                objective.len()
            )));
        }
        if constraints.nrows() != rhs.len() {
            return Err(Error::Dimension(format!(
                "constraint matrix has {} rows but right-hand side has {} entries",
                constraints.nrows(),
                rhs.len()
            )));
        }
        let finite = objective.iter().chain(constraints.iter()).chain(rhs.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Input("LP coefficients must be finite".into()));
        }
        Ok(Self { objective, constraints, rhs })
    }

    /// Pure feasibility problem (zero objective).
    pub fn feasibility(constraints: Matrix, rhs: Vector) -> Result<Self> {
        let n = constraints.ncols();
        Self::new(Vector::zeros(n), constraints, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Largest violation of `g·x <= b` over unit-normalized rows.
    pub fn max_violation(&self, x: &Vector) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.constraints.row_iter().enumerate() {
            let norm = row.norm();
            let lhs = (row * x)[0];
            let v = if norm > 0.0 { (lhs - self.rhs[i]) / norm } else { -self.rhs[i] };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal witness when `status == Optimal`.
    pub point: Option<Vector>,
    pub value: Option<f64>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        Self { status: LpStatus::Infeasible, point: None, value: None }
    }

    fn unbounded() -> Self {
        Self { status: LpStatus::Unbounded, point: None, value: None }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != LpStatus::Infeasible
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    // row-major, `cols + 1` entries per row, last one is the right-hand side
    data: Vec<f64>,
    basis: Vec<usize>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.data[r * w + c];
        for k in 0..w {
            self.data[r * w + k] /= p;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..w {
                let v = self.data[i * w + k] - f * self.data[r * w + k];
                self.data[i * w + k] = if v.abs() < 1e-14 { 0.0 } else { v };
            }
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for i in 0..self.rows {
            d -= cost[self.basis[i]] * self.at(i, j);
        }
        d
    }

    fn run(&mut self, cost: &[f64], allowed: &[bool]) -> Result<PhaseEnd> {
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index improving column
            let entering = (0..self.cols)
                .filter(|&j| allowed[j] && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j) < -COST_EPS);
            let Some(c) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-13 || (ratio <= br + 1e-13 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(PhaseEnd::Unbounded),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::Numerical("simplex iteration cap reached".into()))
    }
}

/// Solve a small LP with free variables.
pub fn lp_solve(problem: &LpProblem) -> Result<LpOutcome> {
    let n = problem.num_vars();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(problem.constraints.nrows());
    for (i, row) in problem.constraints.row_iter().enumerate() {
        let norm = row.norm();
        let b = problem.rhs[i];
        if norm < 1e-14 {
            if b < -LP_TOL {
                return Ok(LpOutcome::infeasible());
            }
            continue;
        }
        rows.push((row.iter().map(|v| v / norm).collect(), b / norm));
    }

    let m = rows.len();
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| rows[i].1 < 0.0).collect();
    let n_art = artificial_rows.len();
    let cols = 2 * n + m + n_art;
    let w = cols + 1;
    let mut t = Tableau { rows: m, cols, data: vec![0.0; m * w], basis: vec![0; m] };
    let mut art_idx = 0;
    for (i, (g, b)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t.data[i * w + j] = sign * g[j];
            t.data[i * w + n + j] = -sign * g[j];
        }
        t.data[i * w + 2 * n + i] = sign;
        t.data[i * w + cols] = sign * b;
        if sign < 0.0 {
            let a = 2 * n + m + art_idx;
            t.data[i * w + a] = 1.0;
            t.basis[i] = a;
            art_idx += 1;
        } else {
            t.basis[i] = 2 * n + i;
        }
    }
    let is_art = |j: usize| j >= 2 * n + m;

    if n_art > 0 {
        let cost: Vec<f64> = (0..cols).map(|j| if is_art(j) { 1.0 } else { 0.0 }).collect();
        let allowed = vec![true; cols];
        t.run(&cost, &allowed)?;
        let infeas: f64 = (0..m).filter(|&i| is_art(t.basis[i])).map(|i| t.rhs(i)).sum();
        if infeas > LP_TOL * 1e-1 {
            return Ok(LpOutcome::infeasible());
        }
        // drive remaining zero-level artificials out of the basis
        for i in 0..m {
            if is_art(t.basis[i]) {
                if let Some(j) = (0..2 * n + m).find(|&j| t.at(i, j).abs() > 1e-9) {
                    t.pivot(i, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[j] = problem.objective[j];
        cost[n + j] = -problem.objective[j];
    }
    let allowed: Vec<bool> = (0..cols).map(|j| !is_art(j)).collect();
    if let PhaseEnd::Unbounded = t.run(&cost, &allowed)? {
        return Ok(LpOutcome::unbounded());
    }

    let mut x = Vector::zeros(n);
    for i in 0..m {
        let b = t.basis[i];
        if b < n {
            x[b] += t.rhs(i);
        } else if b < 2 * n {
            x[b - n] -= t.rhs(i);
        }
    }
    let violation = problem.max_violation(&x);
    if violation > LP_TOL {
        return Err(Error::Numerical(format!("simplex witness violates constraints by {violation:e}")));
    }
    let value = problem.objective.dot(&x);
    Ok(LpOutcome { status: LpStatus::Optimal, point: Some(x), value: Some(value) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn contradictory_bounds_are_infeasible() {
        // u <= 0 and 1 - u <= 0
        let p = LpProblem::feasibility(dmatrix![1.0; -1.0], dvector![0.0, -1.0]).unwrap();
        assert_eq!(lp_solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn slack_constraint_admits_origin() {
        let p = LpProblem::feasibility(dmatrix![1.0], dvector![1.0]).unwrap();
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.point.unwrap()[0], 0.0);
    }

    #[test]
    fn interval_minimum_at_lower_end() {
        // active-set enumeration: candidates u=-1 (value -1) and u=1 (value 1)
        let p = LpProblem::new(dvector![1.0], dmatrix![1.0; -1.0], dvector![1.0, 1.0]).unwrap();
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_direction_detected() {
        let p = LpProblem::new(dvector![-1.0], dmatrix![-1.0], dvector![0.0]).unwrap();
        assert_eq!(lp_solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = LpProblem::new(dvector![1.0, 2.0], dmatrix![1.0], dvector![1.0]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // many constraints through the optimum (0,0)
        let g = dmatrix![-1.0, 0.0; 0.0, -1.0; -1.0, -1.0; -1.0, -2.0; -2.0, -1.0];
        let p = LpProblem::new(dvector![1.0, 1.0], g, dvector![0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let out = lp_solve(&p).unwrap();
        assert!(out.value.unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_row_with_negative_rhs_is_infeasible() {
        let p = LpProblem::feasibility(dmatrix![0.0, 0.0], dvector![-1.0]).unwrap();
        assert_eq!(lp_solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn feasible_witness_satisfies_rows(
                entries in proptest::collection::vec(-3.0f64..3.0, 18),
                rhs in proptest::collection::vec(-1.0f64..3.0, 6),
                obj in proptest::collection::vec(-1.0f64..1.0, 3),
            ) {
                let mut g = Matrix::from_row_slice(6, 3, &entries);
                let mut b = Vector::from_vec(rhs);
                // keep the problem bounded with a box
                g = g.insert_rows(6, 6, 0.0);
                b = b.insert_rows(6, 6, 5.0);
                for k in 0..3 {
                    g[(6 + 2 * k, k)] = 1.0;
                    g[(7 + 2 * k, k)] = -1.0;
                }
                let p = LpProblem::new(Vector::from_vec(obj), g, b).unwrap();
                let out = lp_solve(&p).unwrap();
                if let Some(x) = out.point {
                    prop_assert!(p.max_violation(&x) <= LP_TOL);
                }
            }
        }
    }
}
