//! Fixtures shared by the criterion benches.

use nlde_core::harness::{lookup, CatalogEntry};
use nlde_core::quadrature::{disk_quadrature, DiskGrid};

pub fn entry(name: &str) -> CatalogEntry {
    lookup(name).expect("catalog entry")
}

pub fn grid(r_max: f64, radial_n: usize, angular_n: usize) -> DiskGrid {
    disk_quadrature(r_max, radial_n, angular_n, None).expect("grid")
}
