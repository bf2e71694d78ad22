//! Discrete branched pseudospherical surfaces.
//!
//! Hyperbolic Chebyshev nets are built in the Poincaré disk, cut greedily at
//! trisected branch points, lifted to a spherical Chebyshev net and integrated
//! into a discrete K-surface in R³. The `analysis` and `reference` modules
//! measure the result against smooth baselines.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod complex;
pub mod embed;
mod error;
pub mod hyperbolic;
pub mod netgen;
pub mod reference;
pub mod topology;

pub use error::{Error, Result};
