//! Function-space quantities on the disk: Bloch-type, Bers-type and
//! weighted Hardy norms, and the `Q_K` area integral in both of its
//! kernel-argument forms.
//!
//! Suprema are taken over grid nodes and then polished by a local pattern
//! search in polar coordinates, so the reported value never falls below
//! the plain grid maximum. All values at `r_max < 1` are lower bounds of
//! the corresponding supremum over the whole disk.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticFn, MobiusMap};
use crate::error::{Error, Result};
use crate::kernels::KernelWeight;
use crate::quadrature::{compensated_sum, DiskGrid, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceTag {
    BlochS,
    BersS,
    HardyST,
    Qk,
}

/// Argument fed to the kernel in the `Q_K` integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// `K(g(a, z))`
    Green,
    /// `K(1 - |phi_a(z)|^2)`
    #[default]
    OneMinusPhiSq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub space: SpaceTag,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub kernel: Option<String>,
    pub kernel_form: Option<KernelForm>,
    pub derivative_order: Option<usize>,
    /// For `Qk` this is the area integral itself (the squared seminorm).
    pub value: f64,
    /// Point (or base point `a` for `Qk`) where the supremum was found.
    pub argmax: Complex64,
    pub grid: GridSpec,
    /// Increase produced by the last refinement step of the sup search.
    pub residual: f64,
}

impl NormEstimate {
    fn new(space: SpaceTag, value: f64, argmax: Complex64, grid: GridSpec, residual: f64) -> Self {
        NormEstimate {
            space,
            s: None,
            t: None,
            kernel: None,
            kernel_form: None,
            derivative_order: None,
            value,
            argmax,
            grid,
            residual,
        }
    }
}

fn check_trusted(f: &AnalyticFn, r_max: f64) -> Result<()> {
    if r_max > f.trusted_radius() {
        return Err(Error::domain(format!(
            "grid radius {r_max} exceeds the function's trusted radius {}",
            f.trusted_radius()
        )));
    }
    Ok(())
}

/// Result of a supremum search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupResult {
    pub value: f64,
    pub argmax: Complex64,
    pub residual: f64,
}

const SEEDS: usize = 6;
const MAX_POLISH_ITERS: usize = 400;

/// Supremum of a nonnegative `g` over the closed disk of radius `r_max`:
/// maximum over the grid nodes, then a compass search from the best few
/// nodes with steps halved until below `1e-13`.
pub fn sup_search(grid: &DiskGrid, g: impl Fn(Complex64) -> f64) -> SupResult {
    let r_max = grid.r_max();
    let spec = grid.spec();
    let mut ranked: Vec<(usize, f64)> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (i, g(n.z)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let Some(&(best_idx, best_val)) = ranked.first() else {
        return SupResult {
            value: 0.0,
            argmax: Complex64::new(0.0, 0.0),
            residual: 0.0,
        };
    };
    let mut best = SupResult {
        value: best_val,
        argmax: grid.nodes()[best_idx].z,
        residual: 0.0,
    };
    let dr0 = r_max / spec.radial_n as f64;
    let dt0 = 2.0 * PI / spec.angular_n as f64;
    for &(idx, v0) in ranked.iter().take(SEEDS) {
        let node = grid.nodes()[idx];
        let (mut r, mut th, mut v) = (node.r, node.theta, v0);
        let (mut dr, mut dt) = (dr0, dt0);
        let mut level_start = v;
        let mut last_gain = 0.0;
        for _ in 0..MAX_POLISH_ITERS {
            let mut moved = false;
            for (sr, st) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let rr = (r + sr * dr).clamp(0.0, r_max);
                let tt = th + st * dt;
                let cand = g(Complex64::from_polar(rr, tt));
                if cand > v {
                    r = rr;
                    th = tt;
                    v = cand;
                    moved = true;
                }
            }
            if !moved {
                last_gain = v - level_start;
                level_start = v;
                dr *= 0.5;
                dt *= 0.5;
                if dr < 1e-13 && dt < 1e-13 {
                    break;
                }
            }
        }
        if v > best.value {
            best = SupResult {
                value: v,
                argmax: Complex64::from_polar(r, th),
                residual: last_gain,
            };
        }
    }
    best
}

/// `sup (1 - |z|^2)^weight |h(z)|` over the grid disk.
fn weighted_sup(h: &AnalyticFn, weight: f64, grid: &DiskGrid) -> SupResult {
    sup_search(grid, |z| {
        let w = (1.0 - z.norm_sqr()).max(0.0).powf(weight);
        w * h.eval_unchecked(z).norm()
    })
}

/// `|f(0)| + sup |f'(z)| (1 - |z|^2)^s`.
pub fn bloch_type_norm(f: &AnalyticFn, s: f64, grid: &DiskGrid) -> Result<NormEstimate> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("Bloch exponent must be > 0, got {s}")));
    }
    check_trusted(f, grid.r_max())?;
    let derivative = f.derivative(1);
    let sup = weighted_sup(&derivative, s, grid);
    let at_origin = f.eval(Complex64::new(0.0, 0.0))?.norm();
    let mut est = NormEstimate::new(SpaceTag::BlochS, at_origin + sup.value, sup.argmax, grid.spec().clone(), sup.residual);
    est.s = Some(s);
    Ok(est)
}

/// The supremum term of the Bloch-type norm alone.
pub fn bloch_derivative_term(f: &AnalyticFn, s: f64, grid: &DiskGrid) -> Result<f64> {
    let est = bloch_type_norm(f, s, grid)?;
    Ok(est.value - f.eval(Complex64::new(0.0, 0.0))?.norm())
}

/// `sup (1 - |z|^2)^s |f(z)|`.
pub fn bers_norm(f: &AnalyticFn, s: f64, grid: &DiskGrid) -> Result<NormEstimate> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("Bers exponent must be >= 0, got {s}")));
    }
    check_trusted(f, grid.r_max())?;
    let sup = weighted_sup(f, s, grid);
    let mut est = NormEstimate::new(SpaceTag::BersS, sup.value, sup.argmax, grid.spec().clone(), sup.residual);
    est.s = Some(s);
    Ok(est)
}

/// `sup_r (1 - r^2)^s ( (1/2pi) int |f(r e^{i phi})|^t dphi )^(1/t)` over
/// the given radii, angular mean by the trapezoid rule.
pub fn weighted_hardy_norm(f: &AnalyticFn, s: f64, t: f64, radii: &[f64], angular_n: usize) -> Result<NormEstimate> {
    if !(s >= 0.0) || !(t > 0.0) {
        return Err(Error::domain(format!("weighted Hardy needs s >= 0 and t > 0, got s={s}, t={t}")));
    }
    if angular_n < 4 || radii.is_empty() {
        return Err(Error::domain("weighted Hardy needs at least one radius and 4 angles"));
    }
    let r_top = radii.iter().cloned().fold(0.0, f64::max);
    if radii.iter().any(|&r| !(0.0..1.0).contains(&r)) {
        return Err(Error::domain("radii must lie in [0, 1)"));
    }
    check_trusted(f, r_top)?;
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut previous_best = 0.0;
    for &r in radii {
        let mean = compensated_sum((0..angular_n).map(|m| {
            let z = Complex64::from_polar(r, 2.0 * PI * m as f64 / angular_n as f64);
            f.eval_unchecked(z).norm().powf(t)
        })) / angular_n as f64;
        let v = (1.0 - r * r).powf(s) * mean.powf(1.0 / t);
        if v > best.0 {
            previous_best = best.0.max(0.0);
            best = (v, r);
        }
    }
    let spec = GridSpec::new(r_top.max(f64::MIN_POSITIVE), radii.len().max(4), angular_n);
    let mut est = NormEstimate::new(
        SpaceTag::HardyST,
        best.0,
        Complex64::new(best.1, 0.0),
        spec,
        (best.0 - previous_best).max(0.0),
    );
    est.s = Some(s);
    est.t = Some(t);
    Ok(est)
}

/// Default base points for the `Q_K` supremum: the origin plus 16 angles
/// on each of the radii 0.1, 0.3, 0.5, 0.7, 0.9.
pub fn default_a_grid() -> Vec<Complex64> {
    let mut a = vec![Complex64::new(0.0, 0.0)];
    for &r in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for m in 0..16 {
            a.push(Complex64::from_polar(r, 2.0 * PI * m as f64 / 16.0));
        }
    }
    a
}

/// `int |h(z)|^2 (1 - |z|^2)^(2k-2) K(arg_a(z)) dsigma(z)` for one base point.
fn qk_integral_at(
    values: &dyn Fn(Complex64) -> Complex64,
    kernel: &KernelWeight,
    a: Complex64,
    grid: &DiskGrid,
    form: KernelForm,
    order: usize,
) -> Result<f64> {
    let map = MobiusMap::new(a)?;
    let weight_exp = 2.0 * order as f64 - 2.0;
    let local;
    let grid = match form {
        KernelForm::Green => {
            local = grid.with_singular_center(a)?;
            &local
        }
        KernelForm::OneMinusPhiSq => grid,
    };
    Ok(grid.integrate(|n| {
        let arg = match form {
            KernelForm::Green => map.green(n.z),
            KernelForm::OneMinusPhiSq => map.one_minus_abs_sq(n.z),
        };
        let w = if weight_exp == 0.0 {
            1.0
        } else {
            (1.0 - n.z.norm_sqr()).powf(weight_exp)
        };
        values(n.z).norm_sqr() * w * kernel.eval(arg)
    }))
}

/// Squared `Q_K` seminorm proxy: supremum over `a_grid` of
/// `int |f^(k)(z)|^2 (1 - |z|^2)^(2k-2) K(arg) dsigma(z)` with
/// `arg = g(a, z)` or `1 - |phi_a(z)|^2`. The Green form refines the grid
/// around each base point.
pub fn qk_seminorm(
    f: &AnalyticFn,
    kernel: &KernelWeight,
    a_grid: &[Complex64],
    grid: &DiskGrid,
    form: KernelForm,
    derivative_order: usize,
) -> Result<NormEstimate> {
    if derivative_order < 1 {
        return Err(Error::domain("Q_K derivative order must be >= 1"));
    }
    if a_grid.is_empty() {
        return Err(Error::domain("empty base-point grid"));
    }
    if let Some(a) = a_grid.iter().find(|a| !(a.norm() < 1.0)) {
        return Err(Error::domain(format!("base point {a} outside the disk")));
    }
    kernel.validate()?;
    check_trusted(f, grid.r_max())?;
    let deriv = f.derivative(derivative_order);
    let eval = |z: Complex64| deriv.eval_unchecked(z);
    let per_a: Vec<Result<f64>> = a_grid
        .par_iter()
        .map(|&a| qk_integral_at(&eval, kernel, a, grid, form, derivative_order))
        .collect();
    let mut best = (f64::NEG_INFINITY, a_grid[0]);
    for (v, &a) in per_a.into_iter().zip(a_grid) {
        let v = v?;
        if v > best.0 {
            best = (v, a);
        }
    }
    // refinement residual: the same integral on a half-resolution grid
    let coarse_spec = GridSpec {
        radial_n: (grid.spec().radial_n / 2).max(4),
        angular_n: (grid.spec().angular_n / 2).max(4),
        singular_center: None,
        radial_breaks: Vec::new(),
        ..grid.spec().clone()
    };
    let coarse = DiskGrid::build(&coarse_spec)?;
    let coarse_value = qk_integral_at(&eval, kernel, best.1, &coarse, form, derivative_order)?;
    let mut est = NormEstimate::new(SpaceTag::Qk, best.0, best.1, grid.spec().clone(), (best.0 - coarse_value).abs());
    est.kernel = Some(kernel.label());
    est.kernel_form = Some(form);
    est.derivative_order = Some(derivative_order);
    Ok(est)
}
