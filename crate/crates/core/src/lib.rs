//! Weighted Neumann `(p,q)`-eigenvalues of the p-Laplacian on outward cuspidal
//! domains.
//!
//! The crate has three layers:
//!
//! * closed-form geometry and bounds: [`params`], [`domain`], [`cusp_map`],
//!   [`weight`] and [`bounds`];
//! * numerics: fibre-wise Gauss quadrature ([`quadrature`]), graded P1 meshes
//!   of the planar domains ([`mesh`], [`fem`]) and a constrained
//!   Rayleigh-quotient minimizer ([`eigen`]);
//! * [`verify`], which cross-checks the inequalities and identities that tie
//!   the two together.
//!
//! ```
//! use cusp_eigen::{bounds, ProblemParams};
//!
//! let params = ProblemParams::new(2, 1.5, 1.5, 3.0)?;
//! let pp = bounds::mu_lower_pp(&params)?;
//! assert!((pp.canonical - 0.906_881_593_812_036).abs() < 1e-12);
//! # Ok::<(), cusp_eigen::Error>(())
//! ```

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cusp_map;
pub mod domain;
pub mod eigen;
mod error;
pub mod fem;
pub mod field;
pub mod linalg;
pub mod mesh;
pub mod params;
pub mod quadrature;
pub mod verify;
pub mod weight;

pub use cusp_map::CuspMap;
pub use domain::{CuspDomain, FiberDomain, PyramidDomain};
pub use error::{Error, Result};
pub use params::{DerivedParams, ProblemParams};
pub use weight::{PowerWeight, WeightSpec};

// The guide under `book/` and the README are compiled as doc-tests so their
// snippets track the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/intro.md")]
    pub struct Intro;
    #[doc = include_str!("../../../book/src/geometry.md")]
    pub struct Geometry;
    #[doc = include_str!("../../../book/src/bounds.md")]
    pub struct Bounds;
    #[doc = include_str!("../../../book/src/quadrature.md")]
    pub struct Quadrature;
    #[doc = include_str!("../../../book/src/discretization.md")]
    pub struct Discretization;
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    pub struct Eigensolver;
    #[doc = include_str!("../../../book/src/verification.md")]
    pub struct Verification;
}
