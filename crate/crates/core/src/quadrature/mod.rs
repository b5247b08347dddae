//! One-dimensional rules and area quadrature over the disk.

mod adaptive;
mod disk;
mod gauss;

pub use adaptive::{integrate_adaptive, AdaptiveResult};
pub use disk::{disk_quadrature, DiskGrid, DiskNode, GridSpec};
pub use gauss::{gauss_legendre, GaussPanel};

/// Neumaier compensated sum; deterministic in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
