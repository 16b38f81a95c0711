mod curvature;
mod partition;

pub use curvature::*;
pub use partition::*;
