use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expm::expm;
use super::linalg::{eigenvalues, rank, solve, RANK_TOL};
use crate::error::{Error, Result};
use crate::Matrix;

/// Default bound on closed-loop eigenvalue real parts: `Re λ <= -POLE_MARGIN`.
pub const POLE_MARGIN: f64 = 0.5;

const INPUT_DRAWS: usize = 8;

/// `[B AB … Aⁿ⁻¹B]`.
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut q = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        q.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * &block;
    }
    q
}

pub fn controllability_rank(a: &Matrix, b: &Matrix) -> usize {
    if b.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    rank(&controllability_matrix(a, b), RANK_TOL).unwrap_or(0)
}

/// Ackermann's formula for a single-input pair: returns the row `k` with
/// `eig(A + b k)` equal to `poles`.
pub fn place_poles_single(a: &Matrix, b: &Matrix, poles: &[f64]) -> Result<Matrix> {
    let n = a.nrows();
    if b.ncols() != 1 || b.nrows() != n || poles.len() != n {
        return Err(Error::Dimension("pole placement needs an n x 1 input and n poles".into()));
    }
    let qc = controllability_matrix(a, b);
    if rank(&qc, RANK_TOL)? < n {
        return Err(Error::Precondition("pole placement: pair is not controllable".into()));
    }
    // characteristic polynomial prod (A - p_i I) evaluated at A
    let mut phi = Matrix::identity(n, n);
    for &p in poles {
        phi = &phi * (a - Matrix::identity(n, n) * p);
    }
    let mut en = Matrix::zeros(1, n);
    en[(0, n - 1)] = 1.0;
    // e_nᵀ Qc⁻¹ = (Qc⁻ᵀ e_n)ᵀ
    let row = solve(&qc.transpose(), &en.transpose())?.transpose();
    Ok(-(row * phi))
}

fn closed_loop_abscissa(a: &Matrix, b: &Matrix, k: &Matrix) -> Result<f64> {
    Ok(eigenvalues(&(a + b * k))?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Target poles strictly inside the margin: `-(margin + 0.5 (i+1))`.
pub fn default_poles(n: usize, margin: f64) -> Vec<f64> {
    (0..n).map(|i| -(margin + 0.5 * (i as f64 + 1.0))).collect()
}

/// Static feedback `u = Kx` with every eigenvalue of `A + BK` at real part
/// at most `-margin`.
///
/// Multi-input pairs are reduced to a single input `B g` through a random
/// combination `g` (deterministic seed, a few draws) and solved by Ackermann.
pub fn stabilize_with_margin(a: &Matrix, b: &Matrix, margin: f64) -> Result<Matrix> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension("stabilize: A must be n x n and B n x m".into()));
    }
    if m == 0 || controllability_rank(a, b) < n {
        return Err(Error::Precondition("stabilize: (A, B) is not controllable".into()));
    }
    let poles = default_poles(n, margin);
    let check = |k: &Matrix| -> Result<bool> { Ok(closed_loop_abscissa(a, b, k)? <= -margin + 1e-9 * (1.0 + margin)) };
    let zero = Matrix::zeros(m, n);
    if check(&zero)? {
        return Ok(zero);
    }
    if m == 1 {
        let k = place_poles_single(a, b, &poles)?;
        if check(&k)? {
            return Ok(k);
        }
        return Err(Error::Numerical("pole placement missed the requested margin".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bc5_eed5);
    for _ in 0..INPUT_DRAWS {
        let g = Matrix::from_fn(m, 1, |_, _| rng.random_range(-1.0..1.0));
        let bg = b * &g;
        if controllability_rank(a, &bg) < n {
            continue;
        }
        let k1 = place_poles_single(a, &bg, &poles)?;
        let k = &g * k1;
        if check(&k)? {
            return Ok(k);
        }
    }
    Err(Error::Precondition("stabilize: no single-input reduction was controllable".into()))
}

pub fn stabilize(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    stabilize_with_margin(a, b, POLE_MARGIN)
}

// Gauss–Legendre nodes and weights on [-1, 1], five points.
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn composite_gauss(a: &Matrix, bbt: &Matrix, t_f: f64, panels: usize) -> Result<Matrix> {
    let n = a.nrows();
    let h = t_f / panels as f64;
    let mut w = Matrix::zeros(n, n);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let tau = mid + 0.5 * h * x;
            let e = expm(&(a * -tau))?;
            w += (&e * bbt * e.transpose()) * (0.5 * h * wt);
        }
    }
    Ok(w)
}

/// Controllability Gramian `∫₀^{t_f} e^{-Aτ} B Bᵀ e^{-Aᵀτ} dτ`.
///
/// Composite five-point Gauss–Legendre with panel doubling until the
/// relative change drops below 1e-9.
pub fn gramian(a: &Matrix, b: &Matrix, t_f: f64) -> Result<Matrix> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(Error::Input(format!("gramian horizon must be positive, got {t_f}")));
    }
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension("gramian: A must be n x n and B n x m".into()));
    }
    let bbt = b * b.transpose();
    let mut panels = 2;
    let mut prev = composite_gauss(a, &bbt, t_f, panels)?;
    while panels < 1 << 14 {
        panels *= 2;
        let next = composite_gauss(a, &bbt, t_f, panels)?;
        let change = (&next - &prev).norm();
        let scale = next.norm();
        if change <= 1e-9 * scale || scale == 0.0 {
            return Ok((&next + next.transpose()) * 0.5);
        }
        prev = next;
    }
    Err(Error::Numerical("gramian quadrature did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::rank;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn ackermann_double_integrator() {
        let k = place_poles_single(&dmatrix![0.0, 1.0; 0.0, 0.0], &dmatrix![0.0; 1.0], &[-1.0, -2.0]).unwrap();
        assert_relative_eq!(k, dmatrix![-2.0, -3.0], epsilon = 1e-12);
    }

    #[test]
    fn hurwitz_plant_still_meets_margin() {
        let a = dmatrix![-0.1, 0.0; 0.0, -0.2];
        let b = Matrix::identity(2, 2);
        let k = stabilize(&a, &b).unwrap();
        assert!(closed_loop_abscissa(&a, &b, &k).unwrap() <= -POLE_MARGIN + 1e-9);
    }

    #[test]
    fn circuit_lqr_gain_is_stabilizing() {
        let a = dmatrix![-1.0, -1.0, 0.0; 1.0, 0.0, -1.0; 0.0, 1.0, 0.0];
        let b = dmatrix![1.0; 0.0; 0.0];
        let k1 = dmatrix![-0.8587, -0.7274, 0.1267];
        assert!(closed_loop_abscissa(&a, &b, &k1).unwrap() < 0.0);
        let k = stabilize(&a, &b).unwrap();
        assert!(closed_loop_abscissa(&a, &b, &k).unwrap() <= -POLE_MARGIN + 1e-9);
    }

    #[test]
    fn uncontrollable_rejected() {
        let err = stabilize(&Matrix::zeros(2, 2), &dmatrix![1.0; 0.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn gramian_double_integrator_closed_form() {
        let w = gramian(&dmatrix![0.0, 1.0; 0.0, 0.0], &dmatrix![0.0; 1.0], 1.0).unwrap();
        assert_relative_eq!(w, dmatrix![1.0 / 3.0, -0.5; -0.5, 1.0], epsilon = 1e-12);
    }

    #[test]
    fn gramian_constant_integrand() {
        let w = gramian(&Matrix::zeros(2, 2), &Matrix::identity(2, 2), 2.0).unwrap();
        assert_relative_eq!(w, Matrix::identity(2, 2) * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gramian_uncontrollable_is_rank_deficient() {
        let w = gramian(&Matrix::zeros(2, 2), &dmatrix![1.0; 0.0], 1.0).unwrap();
        assert_eq!(rank(&w, RANK_TOL).unwrap(), 1);
        assert!(gramian(&Matrix::zeros(2, 2), &dmatrix![1.0; 0.0], 0.0).is_err());
    }

    #[test]
    fn multi_input_reduction() {
        let a = dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 1.0; 1.0, -2.0, 0.5];
        let b = dmatrix![1.0, 0.0; 0.0, 0.0; 0.0, 1.0];
        let k = stabilize(&a, &b).unwrap();
        assert_eq!(k.shape(), (2, 3));
        assert!(closed_loop_abscissa(&a, &b, &k).unwrap() <= -POLE_MARGIN + 1e-9);
    }
}
