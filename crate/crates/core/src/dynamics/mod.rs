mod bm;
mod lbm;
mod operator;

pub use bm::{simulate_bm, BrownianPath};
pub use lbm::*;
pub use operator::*;
