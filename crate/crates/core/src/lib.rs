//! Volumes of domains in extended hyperbolic space.
//!
//! The extended hyperbolic space is the projectivized Minkowski space with the
//! hyperbolic metric continued across the light cone. A domain that straddles
//! the ideal boundary gets a finite complex "volume" either by a contour
//! integral that detours around the singular set, or as the limit of integrals
//! of a regularized volume form. This crate implements both pipelines in
//! dimensions 2 and 3, in the Klein model and in the flattened model obtained
//! by the Cayley reflection.
//!
//! Modules, bottom up:
//! - [`geometry`]: models, the Cayley reflection, the projective Lorentz action.
//! - [`density`]: every volume-form density with its branch convention.
//! - [`quadrature`], [`contour`], [`extrapolate`]: adaptive Gauss-Kronrod on
//!   real intervals and complex paths, argument tracking, the epsilon limit.
//! - [`volume`]: domain families, the volume pipelines, divergence profiles.

// `!(x > 0.0)` is used on purpose to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod density;
pub mod extrapolate;
pub mod geometry;
pub mod quadrature;
pub mod volume;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex value type used throughout; finite components are checked at the
/// density and integrator boundaries.
pub type ComplexValue = Complex64;

/// Supported dimensions of the extended hyperbolic space.
pub const SUPPORTED_DIMS: [usize; 2] = [2, 3];

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if SUPPORTED_DIMS.contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}
