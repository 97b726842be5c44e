//! Built-in benchmark problems: a double integrator with a skewed input,
//! the same double integrator driven on velocity, a cart with friction, a
//! cart-mounted balance system and an RLC ladder circuit.

use crate::certify::Direction;
use crate::construct::{Ellipsoid, WitnessSet};
use crate::geometry::Polytope;
use crate::system::AffineSystem;
use crate::{Matrix, Vector};

/// Steering request inside a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerRequest {
    pub x: Vector,
    pub y: Vector,
    pub t_f: f64,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub expected: &'static str,
    pub system: AffineSystem,
    pub x: Polytope,
    pub x_outer: Option<Polytope>,
    pub x1: Option<WitnessSet>,
    pub x2: Option<WitnessSet>,
    pub steer: Option<SteerRequest>,
}

fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_slice(rows, cols, data)
}

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn cube(n: usize, s: f64) -> Polytope {
    Polytope::from_box(&vec![-s; n], &vec![s; n]).expect("box")
}

fn poly(points: &[&[f64]]) -> Polytope {
    Polytope::from_vertices(&points.iter().map(|p| v(p)).collect::<Vec<_>>()).expect("polytope")
}

/// `ẋ = [[0,1],[0,0]]x + [1;1]u`.
pub fn skewed_double_integrator() -> AffineSystem {
    AffineSystem::linear(m(2, 2, &[0.0, 1.0, 0.0, 0.0]), m(2, 1, &[1.0, 1.0])).expect("system")
}

/// `ẋ = [[0,1],[0,0]]x + [0;1]u`.
pub fn double_integrator() -> AffineSystem {
    AffineSystem::linear(m(2, 2, &[0.0, 1.0, 0.0, 0.0]), m(2, 1, &[0.0, 1.0])).expect("system")
}

/// Cart with viscous friction `b` and mass `mass`.
pub fn cart(b: f64, mass: f64) -> AffineSystem {
    AffineSystem::linear(m(2, 2, &[0.0, 1.0, 0.0, -b / mass]), m(2, 1, &[0.0, 1.0 / mass])).expect("system")
}

/// Physical parameters of the balance system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceParams {
    pub cart_mass: f64,
    pub body_mass: f64,
    pub inertia: f64,
    pub length: f64,
    pub friction: f64,
    pub damping: f64,
    pub gravity: f64,
}

impl Default for BalanceParams {
    fn default() -> Self {
        Self { cart_mass: 1.0, body_mass: 0.2, inertia: 0.01, length: 0.5, friction: 0.1, damping: 0.01, gravity: 9.8 }
    }
}

impl BalanceParams {
    pub fn total_mass(&self) -> f64 {
        self.cart_mass + self.body_mass
    }

    pub fn total_inertia(&self) -> f64 {
        self.inertia + self.body_mass * self.length * self.length
    }

    pub fn mu(&self) -> f64 {
        let ml = self.body_mass * self.length;
        self.total_mass() * self.total_inertia() - ml * ml
    }

    /// Linearized cart/body model; states are cart position, body angle,
    /// cart velocity, angular rate.
    pub fn system(&self) -> AffineSystem {
        let (mm, l, g, c, gamma) = (self.body_mass, self.length, self.gravity, self.friction, self.damping);
        let (mt, jt, mu) = (self.total_mass(), self.total_inertia(), self.mu());
        let a = m(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 1.0,
                0.0, mm * mm * l * l * g / mu, -c * jt / mu, -gamma * jt * l * mm / mu,
                0.0, mt * mm * g * l / mu, -c * l * mm / mu, -gamma * mt / mu,
            ],
        );
        let b = m(4, 1, &[0.0, 0.0, jt / mu, l * mm / mu]);
        AffineSystem::linear(a, b).expect("system")
    }

    /// Closed-form drift obstruction for the positive-angle slab.
    pub fn analytic_beta(&self) -> Vector {
        let (mm, l, gamma) = (self.body_mass, self.length, self.damping);
        let (mt, jt, mu) = (self.total_mass(), self.total_inertia(), self.mu());
        v(&[0.0, -gamma * (mt * jt - jt * l * l * mm * mm) / (mu * mu), l * mm / mu, -jt / mu])
    }
}

/// Third-order RLC circuit `ẋ = [[-1,-1,0],[1,0,-1],[0,1,0]]x + e₁u`.
pub fn circuit() -> AffineSystem {
    AffineSystem::linear(m(3, 3, &[-1.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0]), m(3, 1, &[1.0, 0.0, 0.0])).expect("system")
}

/// Reference Lyapunov data for the circuit: forward `(P₁, K₁)` and backward `(P₂, K₂)`.
pub fn circuit_ellipsoids() -> (Ellipsoid, Ellipsoid) {
    let p1 = m(3, 3, &[0.8587, 0.7274, -0.1267, 0.7274, 2.3374, 0.492, -0.1267, 0.492, 2.1186]);
    let k1 = m(1, 3, &[-0.8587, -0.7274, 0.1267]);
    let p2 = m(3, 3, &[2.8587, -0.7274, -0.1267, -0.7274, 4.3374, -0.492, -0.1267, -0.492, 4.1186]);
    let k2 = m(1, 3, &[2.8587, -0.727, -0.1267]);
    let zero = Vector::zeros(3);
    let u0 = Vector::zeros(1);
    (
        Ellipsoid { p: p1, level: 0.5, k: k1, center: zero.clone(), u_bar: u0.clone(), direction: Direction::Forward },
        Ellipsoid { p: p2, level: 1.0, k: k2, center: zero, u_bar: u0, direction: Direction::Backward },
    )
}

pub fn square() -> Polytope {
    poly(&[&[-1.0, -1.0], &[1.0, -1.0], &[1.0, 1.0], &[-1.0, 1.0]])
}

/// Backward-invariant hexagon for the skewed double integrator.
pub fn skewed_hexagon() -> Polytope {
    poly(&[&[-1.0, -1.0], &[1.0, -1.0], &[1.0, 1.0], &[-1.0, 1.0], &[2.25, 0.0], &[-2.25, 0.0]])
}

/// Invariant hexagon for the double integrator on the unit square.
pub fn offset_hexagon() -> Polytope {
    poly(&[&[1.0, 1.0], &[0.0, 1.0], &[0.0, -1.0], &[1.0, -1.0], &[1.25, 0.0], &[-0.25, 0.0]])
}

pub fn example1() -> Fixture {
    Fixture {
        name: "example1",
        summary: "skewed double integrator on the unit square",
        expected: "not-IBC (backward invariance fails at (1,-1))",
        system: skewed_double_integrator(),
        x: square(),
        x_outer: Some(square().scale(2.5).expect("scale")),
        x1: None,
        x2: None,
        steer: None,
    }
}

pub fn example2() -> Fixture {
    Fixture {
        name: "example2",
        summary: "skewed double integrator, unit square through its 2.5 scaling",
        expected: "RIBC-certified, case B",
        system: skewed_double_integrator(),
        x: square(),
        x_outer: Some(square().scale(2.5).expect("scale")),
        x1: None,
        x2: None,
        steer: Some(SteerRequest { x: v(&[-0.5, -0.5]), y: v(&[0.5, 0.5]), t_f: 1.0, rho: None }),
    }
}

pub fn example3() -> Fixture {
    Fixture {
        name: "example3",
        summary: "double integrator, square [0,1]^2 through [-2,2]x[-1,1] with a user hexagon",
        expected: "RIBC-certified, case C",
        system: double_integrator(),
        x: Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]).expect("box"),
        x_outer: Some(Polytope::from_box(&[-2.0, -1.0], &[2.0, 1.0]).expect("box")),
        x1: Some(WitnessSet::Polytope(offset_hexagon())),
        x2: Some(WitnessSet::Polytope(offset_hexagon())),
        steer: None,
    }
}

pub fn example4() -> Fixture {
    Fixture {
        name: "example4",
        summary: "cart with friction (b = m = 1), 0.8-box through the unit box",
        expected: "not-IBC on the unit box; RIBC-certified for the 0.8-box through the unit box, case B",
        system: cart(1.0, 1.0),
        x: cube(2, 0.8),
        x_outer: Some(cube(2, 1.0)),
        x1: None,
        x2: None,
        steer: None,
    }
}

pub fn example5() -> Fixture {
    Fixture {
        name: "example5",
        summary: "balance system, positive-angle slab",
        expected: "not-RIBC, case A (drift obstruction)",
        system: BalanceParams::default().system(),
        x: Polytope::from_box(&[-1.0, 0.2, -0.1, -0.1], &[1.0, 0.3, 0.1, 0.1]).expect("box"),
        x_outer: Some(Polytope::from_box(&[-1.0, 0.0, -0.1, -0.1], &[1.0, 0.3, 0.1, 0.1]).expect("box")),
        x1: None,
        x2: None,
        steer: None,
    }
}

pub fn example6() -> Fixture {
    let (e1, e2) = circuit_ellipsoids();
    Fixture {
        name: "example6",
        summary: "RLC circuit, 0.25-box through the unit box with Lyapunov ellipsoids",
        expected: "RIBC-certified, case B",
        system: circuit(),
        x: cube(3, 0.25),
        x_outer: Some(cube(3, 1.0)),
        x1: Some(WitnessSet::Ellipsoid(e1)),
        x2: Some(WitnessSet::Ellipsoid(e2)),
        steer: Some(SteerRequest { x: v(&[0.2, 0.2, 0.2]), y: v(&[-0.1, 0.1, -0.1]), t_f: 1.0, rho: None }),
    }
}

pub fn all() -> Vec<Fixture> {
    vec![example1(), example2(), example3(), example4(), example5(), example6()]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
