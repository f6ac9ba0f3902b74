//! Detection and classification of bifurcations of planar central
//! configurations of the N-body problem.
//!
//! Central configurations are critical rotation orbits of the augmented
//! potential `phi = U + lambda I`. Along a known family the Hessian of `phi`
//! always has the orbit tangent in its kernel; the family can only bifurcate
//! where the kernel grows. Comparing Morse indices of the Hessian restricted
//! to the complement of the tangent on either side of such a parameter tells
//! a local bifurcation (index changes) from a global one (parity changes,
//! so the equivariant degree changes).
//!
//! Modules, bottom-up:
//! - [`nbody`]: geometry, the potential, its gradient and Hessian.
//! - [`spectral`]: eigenvalues, restricted Hessian, Morse indices.
//! - [`families`]: the two nested squares, the 13-body rosette, CSV families.
//! - [`bifurcation`]: degrees, 1D scans, 2D region maps.
//! - [`report`]: output documents.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod error;
pub mod families;
pub mod nbody;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
