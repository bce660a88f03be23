//! Lozanovskii weights and volume-ratio machinery for subspaces and quotients
//! of finite-dimensional spaces with a 1-unconditional basis.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; file formats and the command-line front end live in the
//! `lozvol` crate.
//!
//! Module map:
//!
//! - [`norm`]: 1-unconditional norms built from weighted `l_p` leaves and
//!   block max/sum combinators, their duals, sampling helpers.
//! - [`lozanovskii`]: positive weights `λ` with `(1/n)|α|_1 <= N(λα) <= |α|_∞`
//!   and the diagonal embedding maps they induce.
//! - [`subspace`]: the enclosing cross-polytope construction for a subspace,
//!   the zonotope determinant formula, max-determinant subset selection and
//!   the dual parallelepiped for quotients.
//! - [`volume`]: exact polytope volumes, polars, Monte Carlo volumes of
//!   gauge bodies and central hyperplane sections.
//! - [`isotropy`]: isotropic position, the isotropy constant, 1-summing
//!   lower bounds and the slicing-inequality checkers.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod hull;
pub mod isotropy;
pub mod linalg;
pub mod lozanovskii;
pub mod norm;
pub mod rng;
pub mod subspace;
pub mod volume;

pub use error::{Error, Result};
pub use norm::{Block, Exponent, Norm, NormOracle, SubspaceBasis};
