//! Numerical laboratory for rotationally symmetric Cartan-Hadamard model
//! manifolds `dt² + j(t)² dθ²`.
//!
//! The warping function is never formed directly. The Jacobi equation
//! `j'' = κ j` is integrated through `w = j'/j`, `log j` and the volume ratio
//! `y = ∫j^{n-1} / j^{n-1}`, which stay polynomially bounded even where `j`
//! itself overflows by many orders of magnitude.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod cutoff;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod green;
pub mod interp;
pub mod ode;
pub mod pde;
pub mod quad;
pub mod radial;
pub mod specfun;
pub mod verify;

pub use curvature::{lambda_profile, CurvatureProfile, Lambda};
pub use error::{Error, Result};
pub use geometry::{build_model, ModelManifold};
pub use green::{build_green, GreenFunction};
pub use radial::{Jet, RadialFunction};
pub use verify::{InequalityReport, Verdict};



