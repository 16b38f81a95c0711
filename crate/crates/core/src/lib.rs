//! Spectral laboratory for co-polyharmonic Gaussian fields on model manifolds.
//!
//! The crate builds GJMS spectra from closed-form Laplace spectra, samples the
//! associated log-correlated fields, turns them into Liouville quantum gravity
//! measures and drives Liouville Brownian motion, random GJMS operators and
//! Polyakov–Liouville partition functions on top of them.

pub mod cgf;
pub mod error;
pub mod dynamics;
pub mod experiment;
pub mod gmc;
pub mod manifolds;
pub mod polyakov;
pub mod special;
pub mod spectral;
pub mod stats;

pub use error::{LqgError, Result};
