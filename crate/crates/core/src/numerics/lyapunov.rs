use super::linalg::{spectral_abscissa, solve};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

fn is_symmetric(m: &Matrix) -> bool {
    (m - m.transpose()).amax() <= 1e-12 * m.amax().max(1.0)
}

/// Solve `A_clᵀ P + P A_cl = -Q` for symmetric `P`.
///
/// The equation is assembled directly over the `n(n+1)/2` independent
/// entries of `P` and solved by LU.
pub fn solve_lyapunov(a_cl: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = a_cl.nrows();
    if a_cl.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Dimension("lyapunov: A_cl and Q must be square of equal size".into()));
    }
    if !is_symmetric(q) || q.clone().cholesky().is_none() {
        return Err(Error::Precondition("lyapunov: Q must be symmetric positive definite".into()));
    }
    let abscissa = spectral_abscissa(a_cl)?;
    if abscissa >= 0.0 {
        return Err(Error::Precondition(format!("lyapunov: A_cl is not Hurwitz (max Re = {abscissa:.3e})")));
    }
    let idx = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // packed upper-triangular index
        i * n - i * (i + 1) / 2 + j
    };
    let size = n * (n + 1) / 2;
    let mut lhs = Matrix::zeros(size, size);
    let mut rhs = Matrix::zeros(size, 1);
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            for k in 0..n {
                // (A^T P)_{ij} = sum_k a_{ki} p_{kj}
                lhs[(row, idx(k, j))] += a_cl[(k, i)];
                // (P A)_{ij} = sum_k p_{ik} a_{kj}
                lhs[(row, idx(i, k))] += a_cl[(k, j)];
            }
            rhs[(row, 0)] = -q[(i, j)];
        }
    }
    let sol = solve(&lhs, &rhs)?;
    let p = Matrix::from_fn(n, n, |i, j| sol[(idx(i, j), 0)]);
    let residual = (a_cl.transpose() * &p + &p * a_cl + q).norm();
    if residual > 1e-8 * q.norm() {
        return Err(Error::Numerical(format!("lyapunov residual {residual:.3e} too large")));
    }
    Ok(p)
}

/// Stabilizing solution of `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` by Newton–Kleinman
/// iteration started from `k0` (which must make `A + B k0` Hurwitz).
///
/// Returns `(P, K)` with `K = −R⁻¹BᵀP`.
pub fn solve_riccati(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, k0: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = a.nrows();
    let m = b.ncols();
    if b.nrows() != n || r.nrows() != m || r.ncols() != m || k0.nrows() != m || k0.ncols() != n {
        return Err(Error::Dimension("riccati: inconsistent A, B, R, K0".into()));
    }
    let r_inv_bt = solve(r, &b.transpose())?;
    let mut k = k0.clone();
    let mut p_prev: Option<Matrix> = None;
    for _ in 0..60 {
        let a_cl = a + b * &k;
        let rhs = q + k.transpose() * r * &k;
        let p = solve_lyapunov(&a_cl, &((&rhs + rhs.transpose()) * 0.5))?;
        k = -&r_inv_bt * &p;
        if let Some(prev) = &p_prev {
            if (&p - prev).norm() <= 1e-13 * p.norm().max(1.0) {
                return Ok((p, k));
            }
        }
        p_prev = Some(p);
    }
    match p_prev {
        Some(p) => Ok((p, k)),
        None => Err(Error::Numerical("riccati iteration produced no iterate".into())),
    }
}

/// `V̇` matrix `A_clᵀP + P A_cl` of the quadratic Lyapunov function.
pub fn lyapunov_derivative(a_cl: &Matrix, p: &Matrix) -> Matrix {
    a_cl.transpose() * p + p * a_cl
}

pub fn quadratic_form(p: &Matrix, x: &Vector) -> f64 {
    (x.transpose() * p * x)[0]
}
