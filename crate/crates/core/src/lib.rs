//! Numerical laboratory for the asymmetric five-vertex model.
//!
//! Modules, in dependency order:
//!
//! - [`complexfn`]: dilogarithm, Bloch-Wigner, Lobachevsky and the `B` function.
//! - [`bethe`]: finite-size Bethe roots, leading eigenvalues and a dense transfer-matrix oracle.
//! - [`thermo`]: free energies and surface tension in the thermodynamic limit.
//! - [`limitshape`]: interior limit-shape map and arctic boundaries.
//! - [`identities`]: randomized residual checks of the analytic identities.
//! - [`mcmc`]: heat-bath sampler on boxed-plane-partition hexagons.
//! - [`cli`]: command-line front end.

pub mod bethe;
pub mod cli;
pub mod complexfn;
pub mod error;
pub mod identities;
pub mod limitshape;
pub mod mcmc;
pub mod numeric;
pub mod thermo;

pub use error::{Error, Result};
pub use num_complex::Complex64 as ComplexValue;
