//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (orders 3, 5, 7, 9, 13 chosen from the 1-norm).

use super::linalg::{norm_one, solve};
use crate::error::{Error, Result};
use crate::Matrix;

// Maximal 1-norms for which each Padé order reaches double precision.
const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

fn pade_coefficients(m: usize) -> Vec<f64> {
    // c_k = (2m-k)! m! / ((2m)! k! (m-k)!), built by the ratio recurrence
    let mut c = vec![1.0; m + 1];
    for k in 1..=m {
        c[k] = c[k - 1] * ((m - k + 1) as f64) / (((2 * m - k + 1) * k) as f64);
    }
    c
}

fn pade(a: &Matrix, m: usize) -> Result<Matrix> {
    let n = a.nrows();
    let c = pade_coefficients(m);
    let mut even = Matrix::identity(n, n) * c[0];
    let mut odd = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n, n);
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = &power * a;
        if k % 2 == 0 {
            even += &power * *ck;
        } else {
            odd += &power * *ck;
        }
    }
    let num = &even + &odd;
    let den = &even - &odd;
    solve(&den, &num)
}

/// `e^M` for a square matrix.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Input(format!("expm: matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("expm: non-finite entry".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = norm_one(m);
    for &(order, theta) in &THETA[..4] {
        if norm <= theta {
            return pade(m, order);
        }
    }
    let theta13 = THETA[4].1;
    let squarings = if norm > theta13 { (norm / theta13).log2().ceil() as i32 } else { 0 };
    let scaled = m * 2f64.powi(-squarings);
    let mut r = pade(&scaled, 13)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
