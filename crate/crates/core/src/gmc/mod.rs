//! Liouville quantum gravity measures on the quadrature grid.

pub mod checks;
pub mod conformal;
pub mod measure;

pub use checks::*;
pub use conformal::*;
pub use measure::*;
