//! First non-trivial weighted Neumann `(p,q)`-eigenvalue on a mesh.
//!
//! The eigenvalue is the minimum of the Rayleigh quotient
//! `‖∇u‖_p^p / ‖u‖_{q,w}^p` over fields whose signed moment
//! `∫ |u|^{q-2} u w` vanishes. [`recenter`] maps any field onto that set by a
//! scalar shift, and [`minimize_rq`] runs a projected descent on it;
//! [`linear_oracle_solve`] handles the linear `p = q = 2` case directly.

mod linear;
mod problem;
mod recenter;
mod solver;

pub use linear::linear_oracle_solve;
pub use problem::{rayleigh_quotient, DiscreteProblem, Evaluation};
pub use recenter::{recenter, recenter_discrete, signed_moment, Recentering};
pub use solver::{minimize_rq, EigenResult, SolverConfig};
