pub mod analytic;
pub mod bounds;
pub mod conditions;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod quadrature;
pub mod ray_solver;
pub mod spaces;

pub use error::{Error, Result};
