//! Analytic functions on the unit disk and the disk automorphisms.
//!
//! [`PowerSeries`] is the general representation: a truncated Taylor
//! expansion at the origin. [`AnalyticFn`] adds a few closed forms with
//! singularities on the unit circle (`log(1/(1-z))`, `1/(1-z)`) whose
//! Taylor tails converge too slowly to be truncated near the boundary.

mod function;
mod mobius;
mod series;

pub use function::AnalyticFn;
pub use mobius::{green, mobius_and_green, MobiusMap};
pub use series::PowerSeries;

pub use num_complex::Complex64;

