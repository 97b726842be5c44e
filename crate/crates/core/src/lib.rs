//! Certification and controller synthesis for affine systems
//! `ẋ = Ax + Bu + a` under polytopic state constraints.
//!
//! The crate decides in-block controllability (IBC) of a system on a
//! polytope and relaxed in-block controllability (RIBC) through a larger
//! polytope, builds the invariant sets and steering controllers that
//! witness a positive verdict, and checks everything by simulation.

pub mod certify;
pub mod construct;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod numerics;
pub mod sim;
pub mod steer;
pub mod system;

pub use error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
