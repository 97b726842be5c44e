//! The affine plant `ẋ = Ax + Bu + a`, its equilibrium set and the
//! location of that set relative to the state polytopes.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::geometry::{Containment, Polytope, GEOM_TOL};
use crate::numerics::linalg::{eigenvalues, kernel, least_squares, range, rank, RANK_TOL};
use crate::numerics::{controllability_matrix, controllability_rank};
use crate::{Matrix, Vector};

/// Residual allowed when checking `A x + B u + a = 0` or membership in 𝒪.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub offset: Vector,
}

impl AffineSystem {
    pub fn new(a: Matrix, b: Matrix, offset: Vector) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::Dimension(format!("A must be square and nonempty, got {}x{}", a.nrows(), a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B must have {n} rows, got {}x{}", b.nrows(), b.ncols())));
        }
        if offset.len() != n {
            return Err(Error::Dimension(format!("offset must have length {n}, got {}", offset.len())));
        }
        if a.iter().chain(b.iter()).chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("system data must be finite".into()));
        }
        if b.ncols() > 0 && rank(&b, RANK_TOL)? < b.ncols() {
            return Err(Error::Input("B must have full column rank".into()));
        }
        Ok(Self { a, b, offset })
    }

    /// Linear system (zero offset).
    pub fn linear(a: Matrix, b: Matrix) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, b, Vector::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn field(&self, x: &Vector, u: &Vector) -> Vector {
        &self.a * x + &self.b * u + &self.offset
    }

    /// `(−A, −B, −a)`.
    pub fn backward(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, offset: -&self.offset }
    }

    pub fn controllability_rank(&self) -> usize {
        controllability_rank(&self.a, &self.b)
    }

    pub fn is_controllable(&self) -> bool {
        self.controllability_rank() == self.n()
    }

    /// Columns spanning the left annihilator of `B` (kernel of `Bᵀ`).
    pub fn annihilator(&self) -> Matrix {
        kernel(&self.b.transpose(), RANK_TOL).expect("positive tolerance")
    }

    /// 𝒪 = {x : Ax + a ∈ Im B}.
    pub fn equilibrium_set(&self) -> EquilibriumSet {
        let n = self.n();
        let nn = self.annihilator();
        if nn.ncols() == 0 {
            return EquilibriumSet { nonempty: true, base: Vector::zeros(n), basis: Matrix::identity(n, n) };
        }
        let m = nn.transpose() * &self.a;
        let rhs = -(nn.transpose() * &self.offset);
        let empty = EquilibriumSet { nonempty: false, base: Vector::zeros(n), basis: Matrix::zeros(n, 0) };
        let Ok(base) = least_squares(&m, &rhs) else { return empty };
        let resid = (&m * &base - &rhs).norm();
        if resid > EQUILIBRIUM_TOL * (1.0 + rhs.norm()) {
            return empty;
        }
        let basis = kernel(&m, RANK_TOL).expect("positive tolerance");
        EquilibriumSet { nonempty: true, base, basis }
    }

    /// Least-squares `ū` with `A x̄ + B ū + a = 0`.
    pub fn equilibrium_input(&self, x_bar: &Vector) -> Result<Vector> {
        let rhs = -(&self.a * x_bar + &self.offset);
        let u = least_squares(&self.b, &rhs)?;
        let resid = (&self.b * &u - &rhs).norm();
        if resid > EQUILIBRIUM_TOL * (1.0 + rhs.norm()) {
            return Err(Error::Domain(format!("point is not an equilibrium (residual {resid:.3e})")));
        }
        Ok(u)
    }

    /// Shift to `x̃ = x − x̄`, `ũ = u − ū`; returns the linear system and `ū`.
    pub fn translate_to_linear(&self, x_bar: &Vector) -> Result<(AffineSystem, Vector)> {
        if x_bar.len() != self.n() {
            return Err(Error::Dimension("equilibrium point has wrong dimension".into()));
        }
        let u_bar = self.equilibrium_input(x_bar)?;
        Ok((Self { a: self.a.clone(), b: self.b.clone(), offset: Vector::zeros(self.n()) }, u_bar))
    }

    /// Orthogonal Kalman controllability decomposition.
    pub fn kalman_decomposition(&self) -> Result<KalmanDecomposition> {
        let n = self.n();
        let qc = controllability_matrix(&self.a, &self.b);
        let u1 = range(&qc, RANK_TOL)?;
        let r = u1.ncols();
        let u2 = if r == n {
            Matrix::zeros(n, 0)
        } else {
            kernel(&Matrix::from_fn(r.max(1), n, |i, j| if r == 0 { 0.0 } else { u1[(j, i)] }), RANK_TOL)?
        };
        let t = Matrix::from_fn(n, n, |i, j| if j < r { u1[(i, j)] } else { u2[(i, j - r)] });
        let at = t.transpose() * &self.a * &t;
        let bt = t.transpose() * &self.b;
        let a21 = at.view((r, 0), (n - r, r)).into_owned();
        let scale = 1.0 + self.a.norm();
        if a21.norm() > 1e-8 * scale {
            return Err(Error::Numerical(format!("Kalman block structure violated ({:.3e})", a21.norm())));
        }
        let a22 = at.view((r, r), (n - r, n - r)).into_owned();
        let modes = if n > r {
            eigenvalues(&a22)?
                .into_iter()
                .map(|lambda| UncontrollableMode { value: lambda, kind: ModeKind::classify(lambda, 1e-9 * scale) })
                .collect()
        } else {
            Vec::new()
        };
        Ok(KalmanDecomposition {
            transform: t,
            controllable_dim: r,
            a11: at.view((0, 0), (r, r)).into_owned(),
            a12: at.view((0, r), (r, n - r)).into_owned(),
            a22,
            b1: bt.view((0, 0), (r, self.m())).into_owned(),
            modes,
        })
    }
}

/// Affine set `{base + basis·z}`; `basis` has orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    pub nonempty: bool,
    pub base: Vector,
    pub basis: Matrix,
}

impl EquilibriumSet {
    pub fn dim(&self) -> usize {
        if self.nonempty {
            self.basis.ncols()
        } else {
            0
        }
    }

    /// Orthogonal projection onto the affine set.
    pub fn project(&self, x: &Vector) -> Vector {
        let d = x - &self.base;
        &self.base + &self.basis * (self.basis.transpose() * d)
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.nonempty && self.distance(x) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// 𝒪 misses the interior of the outer polytope.
    A,
    /// 𝒪 meets the interior of the inner polytope.
    B,
    /// 𝒪 meets the outer interior only.
    C,
}

impl CaseKind {
    pub fn label(self) -> &'static str {
        match self {
            CaseKind::A => "A",
            CaseKind::B => "B",
            CaseKind::C => "C",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricCase {
    pub kind: CaseKind,
    /// Point of 𝒪 in the interior of the inner polytope, if any.
    pub inner_witness: Option<Vector>,
    /// Point of 𝒪 in the interior of the outer polytope, if any.
    pub outer_witness: Option<Vector>,
    pub inner_slack: f64,
    pub outer_slack: f64,
    pub warnings: Vec<String>,
}

/// Closed containment of every vertex plus some outer vertex outside the inner set.
pub fn check_nesting(x: &Polytope, x_outer: &Polytope) -> Result<()> {
    if x.dim() != x_outer.dim() {
        return Err(Error::Dimension("inner and outer polytopes differ in dimension".into()));
    }
    if !x_outer.contains_polytope(x) {
        return Err(Error::Input("inner polytope is not contained in the outer polytope".into()));
    }
    if x_outer.vertices().iter().all(|v| x.contains(v, Containment::Closed)) {
        return Err(Error::Input("outer polytope must strictly enlarge the inner polytope".into()));
    }
    Ok(())
}

fn grazing_warning(slack: f64, name: &str) -> Option<String> {
    (slack.abs() <= 10.0 * GEOM_TOL).then(|| format!("equilibrium set grazes the boundary of {name} (slack {slack:.2e})"))
}

pub fn classify_case(sys: &AffineSystem, x: &Polytope, x_outer: &Polytope) -> Result<GeometricCase> {
    if x.dim() != sys.n() {
        return Err(Error::Dimension("polytope dimension does not match the system".into()));
    }
    check_nesting(x, x_outer)?;
    let eq = sys.equilibrium_set();
    if !eq.nonempty {
        return Ok(GeometricCase {
            kind: CaseKind::A,
            inner_witness: None,
            outer_witness: None,
            inner_slack: f64::NEG_INFINITY,
            outer_slack: f64::NEG_INFINITY,
            warnings: vec!["equilibrium set is empty".into()],
        });
    }
    let inner = x.intersects_affine_open(&eq.base, &eq.basis)?;
    let outer = x_outer.intersects_affine_open(&eq.base, &eq.basis)?;
    let mut warnings: Vec<String> = Vec::new();
    warnings.extend(grazing_warning(inner.slack, "X"));
    warnings.extend(grazing_warning(outer.slack, "X'"));
    let kind = if inner.intersects {
        CaseKind::B
    } else if outer.intersects {
        CaseKind::C
    } else {
        CaseKind::A
    };
    Ok(GeometricCase {
        kind,
        inner_witness: inner.intersects.then(|| inner.witness.clone()),
        outer_witness: outer.intersects.then(|| outer.witness.clone()),
        inner_slack: inner.slack,
        outer_slack: outer.slack,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Unstable,
    Stable,
    Zero,
    PureImaginary,
}

impl ModeKind {
    fn classify(lambda: Complex<f64>, tol: f64) -> Self {
        if lambda.re > tol {
            ModeKind::Unstable
        } else if lambda.re < -tol {
            ModeKind::Stable
        } else if lambda.im.abs() <= tol {
            ModeKind::Zero
        } else {
            ModeKind::PureImaginary
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeKind::Unstable => "unstable",
            ModeKind::Stable => "stable",
            ModeKind::Zero => "zero",
            ModeKind::PureImaginary => "pure-imaginary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncontrollableMode {
    pub value: Complex<f64>,
    pub kind: ModeKind,
}

/// `Tᵀ A T = [[A11, A12], [0, A22]]`, `Tᵀ B = [B1; 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanDecomposition {
    pub transform: Matrix,
    pub controllable_dim: usize,
    pub a11: Matrix,
    pub a12: Matrix,
    pub a22: Matrix,
    pub b1: Matrix,
    pub modes: Vec<UncontrollableMode>,
}

impl KalmanDecomposition {
    pub fn is_trivial(&self) -> bool {
        self.modes.is_empty()
    }
}
