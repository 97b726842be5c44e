use nalgebra::linalg::{Schur, SVD};
use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Default relative rank tolerance.
pub const RANK_TOL: f64 = 1e-9;

fn check_nonempty(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Input(format!("{what}: empty matrix")));
    }
    Ok(())
}

fn check_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Input(format!("{what}: matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn singular_values(m: &Matrix) -> Vector {
    SVD::new(m.clone(), false, false).singular_values
}

/// Number of singular values above `tol * sigma_max`.
pub fn rank(m: &Matrix, tol: f64) -> Result<usize> {
    check_nonempty(m, "rank")?;
    if tol <= 0.0 {
        return Err(Error::Input("rank tolerance must be positive".into()));
    }
    let sv = singular_values(m);
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn kernel(m: &Matrix, tol: f64) -> Result<Matrix> {
    if tol <= 0.0 {
        return Err(Error::Input("kernel tolerance must be positive".into()));
    }
    let cols = m.ncols();
    if cols == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if m.nrows() == 0 {
        return Ok(Matrix::identity(cols, cols));
    }
    // pad wide matrices so the SVD returns a full right basis
    let padded = if m.nrows() < cols { m.clone().resize(cols, cols, 0.0) } else { m.clone() };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let basis: Vec<Vector> = (0..v_t.nrows())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= tol * smax)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if basis.is_empty() {
        return Ok(Matrix::zeros(cols, 0));
    }
    Ok(Matrix::from_columns(&basis))
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn range(m: &Matrix, tol: f64) -> Result<Matrix> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Ok(Matrix::zeros(rows, 0));
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let basis: Vec<Vector> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax)
        .map(|i| u.column(i).into_owned())
        .collect();
    if basis.is_empty() {
        return Ok(Matrix::zeros(rows, 0));
    }
    Ok(Matrix::from_columns(&basis))
}

/// Eigenvalues via Hessenberg reduction and shifted QR (real Schur form).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex<f64>>> {
    check_square(m, "eigenvalues")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(1))
        .ok_or_else(|| Error::Numerical("shifted QR did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part among the eigenvalues.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Minimum-norm least-squares solution of `m x = b`.
pub fn least_squares(m: &Matrix, b: &Vector) -> Result<Vector> {
    if m.nrows() != b.len() {
        return Err(Error::Dimension(format!("least squares: {} rows vs rhs {}", m.nrows(), b.len())));
    }
    if m.ncols() == 0 {
        return Ok(Vector::zeros(0));
    }
    let svd = SVD::new(m.clone(), true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * RANK_TOL).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).map_err(|e| Error::Numerical(e.to_string()))
}

/// Solve a square nonsingular system.
pub fn solve(m: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_square(m, "solve")?;
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular linear system".into()))
}

pub fn inverse(m: &Matrix) -> Result<Matrix> {
    solve(m, &Matrix::identity(m.nrows(), m.nrows()))
}

/// Infinity (max-row-sum) norm.
pub fn norm_inf(m: &Matrix) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// One (max-column-sum) norm.
pub fn norm_one(m: &Matrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}
