//! Truncated co-polyharmonic Gaussian fields: sampling, covariance checks,
//! Girsanov shifts and mollified variants.

pub mod field;
pub mod girsanov;
pub mod mollify;
pub mod rng;

pub use field::*;
pub use girsanov::*;
pub use mollify::*;
pub use rng::{derive_seed, purpose, RngStream};
