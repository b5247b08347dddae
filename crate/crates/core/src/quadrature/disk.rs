use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::{gauss_legendre, graded_toward_zero};
use crate::error::{Error, Result};

/// Radius of the refined neighbourhood around a singular center.
pub const SINGULAR_RADIUS: f64 = 0.05;
const GRADED_LEVELS: usize = 24;
const GRADED_RATIO: f64 = 0.25;

/// Construction parameters of a [`DiskGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    pub radial_n: usize,
    pub angular_n: usize,
    #[serde(default)]
    pub singular_center: Option<Complex64>,
    /// Interior radial breakpoints; each radial panel gets its own
    /// `radial_n`-point Gauss rule.
    #[serde(default)]
    pub radial_breaks: Vec<f64>,
}

impl GridSpec {
    pub fn new(r_max: f64, radial_n: usize, angular_n: usize) -> Self {
        GridSpec {
            r_max,
            radial_n,
            angular_n,
            singular_center: None,
            radial_breaks: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::domain(format!("r_max = {} outside (0, 1)", self.r_max)));
        }
        if self.radial_n < 4 || self.angular_n < 4 {
            return Err(Error::domain("radial_n and angular_n must be >= 4"));
        }
        let mut prev = 0.0;
        for &b in &self.radial_breaks {
            if !(b > prev && b < self.r_max) {
                return Err(Error::domain("radial breaks must increase strictly inside (0, r_max)"));
            }
            prev = b;
        }
        if let Some(c) = self.singular_center {
            if !self.radial_breaks.is_empty() {
                return Err(Error::domain("singular refinement does not combine with radial breaks"));
            }
            if !(c.norm() < self.r_max) {
                return Err(Error::domain("singular center must lie inside the grid disk"));
            }
        }
        Ok(())
    }

    /// Panel boundaries `0 = b_0 < b_1 < ... < b_m = r_max`.
    pub fn panel_edges(&self) -> Vec<f64> {
        let mut e = vec![0.0];
        e.extend_from_slice(&self.radial_breaks);
        e.push(self.r_max);
        e
    }
}

/// One quadrature node. `r`, `theta` are polar coordinates about the origin;
/// `panel` is the radial panel index (always 0 for singular-refined grids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskNode {
    pub z: Complex64,
    pub weight: f64,
    pub r: f64,
    pub theta: f64,
    pub panel: usize,
}

/// Area quadrature over `{|z| <= r_max}` for the measure normalized so the
/// unit disk has mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid {
    nodes: Vec<DiskNode>,
    spec: GridSpec,
}

/// Polar tensor grid (Gauss-Legendre radially, trapezoid angularly), with
/// optional local refinement around `singular_center`.
pub fn disk_quadrature(
    r_max: f64,
    radial_n: usize,
    angular_n: usize,
    singular_center: Option<Complex64>,
) -> Result<DiskGrid> {
    DiskGrid::build(&GridSpec {
        singular_center,
        ..GridSpec::new(r_max, radial_n, angular_n)
    })
}

impl DiskGrid {
    pub fn build(spec: &GridSpec) -> Result<DiskGrid> {
        spec.validate()?;
        let nodes = match spec.singular_center {
            None => tensor_nodes(spec),
            Some(c) if c.norm() <= 1e-14 => centered_refined_nodes(spec),
            Some(c) => offset_refined_nodes(spec, c),
        };
        Ok(DiskGrid {
            nodes,
            spec: spec.clone(),
        })
    }

    /// Composite polar grid with interior radial `breaks`.
    pub fn composite(r_max: f64, breaks: &[f64], radial_n: usize, angular_n: usize) -> Result<DiskGrid> {
        DiskGrid::build(&GridSpec {
            radial_breaks: breaks.to_vec(),
            ..GridSpec::new(r_max, radial_n, angular_n)
        })
    }

    /// Same construction parameters, refined around `center`.
    pub fn with_singular_center(&self, center: Complex64) -> Result<DiskGrid> {
        DiskGrid::build(&GridSpec {
            singular_center: Some(center),
            radial_breaks: Vec::new(),
            ..self.spec.clone()
        })
    }

    pub fn nodes(&self) -> &[DiskNode] {
        &self.nodes
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&DiskNode) -> f64) -> f64 {
        super::compensated_sum(self.nodes.iter().map(|n| n.weight * f(n)))
    }

    /// Integral restricted to each radial panel, in panel order.
    pub fn integrate_by_panel(&self, mut f: impl FnMut(&DiskNode) -> f64) -> Vec<f64> {
        let panels = self.spec.radial_breaks.len() + 1;
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); panels];
        for n in &self.nodes {
            terms[n.panel].push(n.weight * f(n));
        }
        terms.into_iter().map(super::compensated_sum).collect()
    }

    /// Distinct node radii of a tensor grid, ascending.
    pub fn radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.nodes.iter().map(|n| n.r).collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    /// Angles of the trapezoid rule (tensor grids).
    pub fn angles(&self) -> Vec<f64> {
        trapezoid_angles(self.spec.angular_n)
    }
}

pub(crate) fn trapezoid_angles(n: usize) -> Vec<f64> {
    (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).collect()
}

fn polar_node(r: f64, theta: f64, weight: f64, panel: usize) -> DiskNode {
    DiskNode {
        z: Complex64::from_polar(r, theta),
        weight,
        r,
        theta,
        panel,
    }
}

// d sigma = (1/pi) r dr dtheta
fn tensor_nodes(spec: &GridSpec) -> Vec<DiskNode> {
    let angles = trapezoid_angles(spec.angular_n);
    let dtheta = 2.0 * PI / spec.angular_n as f64;
    let edges = spec.panel_edges();
    let mut nodes = Vec::with_capacity(edges.len() * spec.radial_n * spec.angular_n);
    for (panel, w) in edges.windows(2).enumerate() {
        let g = gauss_legendre(spec.radial_n, w[0], w[1]);
        for (&r, &wr) in g.nodes.iter().zip(&g.weights) {
            for &t in &angles {
                nodes.push(polar_node(r, t, wr * r * dtheta / PI, panel));
            }
        }
    }
    nodes
}

fn graded_per_panel(spec: &GridSpec) -> usize {
    (spec.radial_n / 4).max(8)
}

fn centered_refined_nodes(spec: &GridSpec) -> Vec<DiskNode> {
    let delta = SINGULAR_RADIUS.min(0.5 * spec.r_max);
    let angles = trapezoid_angles(spec.angular_n);
    let dtheta = 2.0 * PI / spec.angular_n as f64;
    let mut radial = graded_toward_zero(delta, GRADED_LEVELS, GRADED_RATIO, graded_per_panel(spec));
    let outer = gauss_legendre(spec.radial_n, delta, spec.r_max);
    radial.extend(outer.nodes.into_iter().zip(outer.weights));
    let mut nodes = Vec::with_capacity(radial.len() * angles.len());
    for (r, wr) in radial {
        for &t in &angles {
            nodes.push(polar_node(r, t, wr * r * dtheta / PI, 0));
        }
    }
    nodes
}

/// Exact domain split: a graded polar disk of radius `delta` about `c`,
/// plus the complement integrated in polar coordinates about the origin.
/// Rays that cross the small disk (the "shadow" sector) are parametrized
/// so the chord endpoints are smooth in the quadrature variable.
fn offset_refined_nodes(spec: &GridSpec, c: Complex64) -> Vec<DiskNode> {
    let rc = c.norm();
    let theta_c = c.arg();
    let delta = SINGULAR_RADIUS.min(0.5 * (spec.r_max - rc)).min(0.5 * rc);
    let mut nodes = Vec::new();

    // region A: disk about c
    let angles = trapezoid_angles(spec.angular_n);
    let dpsi = 2.0 * PI / spec.angular_n as f64;
    for (rho, wr) in graded_toward_zero(delta, GRADED_LEVELS, GRADED_RATIO, graded_per_panel(spec)) {
        for &psi in &angles {
            let z = c + Complex64::from_polar(rho, psi);
            if z == c {
                // offset below the resolution of c; negligible weight
                continue;
            }
            nodes.push(DiskNode {
                z,
                weight: wr * rho * dpsi / PI,
                r: z.norm(),
                theta: z.arg().rem_euclid(2.0 * PI),
                panel: 0,
            });
        }
    }

    // region B, away from the shadow: theta in [theta_c + alpha, theta_c + 2 pi - alpha]
    let sin_alpha = delta / rc;
    let alpha = sin_alpha.asin();
    let radial = gauss_legendre(spec.radial_n, 0.0, spec.r_max);
    let arc = gauss_legendre(spec.angular_n, theta_c + alpha, theta_c + 2.0 * PI - alpha);
    for (&t, &wt) in arc.nodes.iter().zip(&arc.weights) {
        let t = t.rem_euclid(2.0 * PI);
        for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
            nodes.push(polar_node(r, t, wr * r * wt / PI, 0));
        }
    }

    // shadow sector: theta = theta_c + asin(sin_alpha sin s), s in [-pi/2, pi/2]
    let shadow_n = (spec.angular_n / 2).max(16);
    let sector = gauss_legendre(shadow_n, -0.5 * PI, 0.5 * PI);
    for (&s, &ws) in sector.nodes.iter().zip(&sector.weights) {
        let x = sin_alpha * s.sin();
        let dtheta_ds = sin_alpha * s.cos() / (1.0 - x * x).sqrt();
        let t = (theta_c + x.asin()).rem_euclid(2.0 * PI);
        let cos_rel = (1.0 - x * x).sqrt();
        let near = rc * cos_rel - delta * s.cos();
        let far = rc * cos_rel + delta * s.cos();
        for (lo, hi) in [(0.0, near), (far, spec.r_max)] {
            let g = gauss_legendre(spec.radial_n, lo, hi);
            for (&r, &wr) in g.nodes.iter().zip(&g.weights) {
                nodes.push(polar_node(r, t, wr * r * ws * dtheta_ds / PI, 0));
            }
        }
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_integrates_to_normalized_area() {
        let g = disk_quadrature(0.9, 16, 16, None).unwrap();
        assert_abs_diff_eq!(g.integrate(|_| 1.0), 0.81, epsilon = 1e-10);
        assert!(g.nodes().iter().all(|n| n.r <= 0.9 && n.weight > 0.0));
    }

    #[test]
    fn second_moment() {
        let r = 1.0 - 1e-3;
        let g = disk_quadrature(r, 16, 16, None).unwrap();
        assert_abs_diff_eq!(g.integrate(|n| n.z.norm_sqr()), r.powi(4) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn log_singularity_at_origin() {
        let g = disk_quadrature(1.0 - 1e-9, 32, 16, Some(Complex64::new(0.0, 0.0))).unwrap();
        assert_abs_diff_eq!(g.integrate(|n| -n.r.ln()), 0.5, epsilon = 1e-6);
    }

    #[test]
    fn offset_refinement_preserves_area_and_moments() {
        let c = Complex64::new(0.3, 0.4);
        let g = disk_quadrature(0.95, 32, 64, Some(c)).unwrap();
        assert_abs_diff_eq!(g.integrate(|_| 1.0), 0.95f64.powi(2), epsilon = 1e-10);
        assert_abs_diff_eq!(g.integrate(|n| n.z.norm_sqr()), 0.95f64.powi(4) / 2.0, epsilon = 1e-10);
        assert!(g.nodes().iter().all(|n| n.z != c && n.r <= 0.95 + 1e-15));
    }

    #[test]
    fn offset_refinement_integrates_log_singularity() {
        // the circle mean of log|z - c| over |z| = rho is log max(rho, |c|)
        let c = Complex64::new(0.25, -0.1);
        let r_max = 0.9;
        let g = disk_quadrature(r_max, 48, 96, Some(c)).unwrap();
        let v = g.integrate(|n| -(n.z - c).norm().ln());
        let rc = c.norm();
        let inner = rc.ln() * rc * rc; // 2 int_0^{rc} rho log rc
        let outer = (r_max * r_max * r_max.ln() - r_max * r_max / 2.0) - (rc * rc * rc.ln() - rc * rc / 2.0);
        let expected = -(inner + outer);
        assert_abs_diff_eq!(v, expected, epsilon = 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(disk_quadrature(1.0, 8, 8, None).is_err());
        assert!(disk_quadrature(0.5, 3, 8, None).is_err());
        assert!(DiskGrid::composite(0.9, &[0.5, 0.4], 8, 8).is_err());
    }

    #[test]
    fn composite_panels_sum_to_whole() {
        let g = DiskGrid::composite(0.99, &[0.5, 0.9], 12, 8).unwrap();
        let parts = g.integrate_by_panel(|_| 1.0);
        assert_eq!(parts.len(), 3);
        assert_abs_diff_eq!(parts[0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(parts.iter().sum::<f64>(), 0.99f64.powi(2), epsilon = 1e-13);
    }
}
