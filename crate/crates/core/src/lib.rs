pub mod dynamics;
pub mod error;
pub mod gibbs;
pub mod harness;
pub mod metrics;
pub mod problem;
pub mod quadrature;
pub mod schedules;

pub use error::{Error, Result};
