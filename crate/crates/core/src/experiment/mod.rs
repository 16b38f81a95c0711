mod config;
mod output;
mod runners;

pub use config::*;
pub use output::*;
pub use runners::*;
