//! Dense linear algebra and optimization kernels.

pub mod control;
pub mod expm;
pub mod linalg;
pub mod lp;
pub mod lyapunov;

pub use control::{controllability_matrix, controllability_rank, gramian, place_poles_single, stabilize, stabilize_with_margin, POLE_MARGIN};
pub use expm::expm;
pub use linalg::{eigenvalues, kernel, least_squares, rank, RANK_TOL};
pub use lp::{lp_solve, LpOutcome, LpProblem, LpStatus, LP_TOL};
pub use lyapunov::{solve_lyapunov, solve_riccati};
