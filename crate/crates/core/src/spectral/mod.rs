//! GJMS spectra, kernels, the co-polyharmonic form and conformal changes.

pub mod conformal;
pub mod form;
pub mod gjms;
pub mod kernels;
pub mod rg;
pub mod weyl;

pub use conformal::ConformalChange;
pub use form::*;
pub use gjms::*;
pub use kernels::*;
pub use rg::*;
pub use weyl::*;
