//! Hypothesis checks for the two `Q_K` membership theorems and empirical
//! `Q_K` integral scans on solved equations.
//!
//! Neither check can conclude membership. The coefficient check compares
//! weighted suprema on a finite grid against a user threshold; the scan
//! reports the trend of the `Q_K` integral as `r_max -> 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::MobiusMap;
use crate::error::{Error, Result};
use crate::kernels::{condition_22, condition_43, ConditionVerdict, KernelWeight};
use crate::quadrature::{disk_quadrature, DiskGrid};
use crate::ray_solver::{solve_fan, EquationSpec, RayOptions, RaySolution};
use crate::spaces::sup_search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremMode {
    /// Weights `(1-|z|^2)^{n_k(k-j)}`, `A_0` weighted by `n_k(k-c)`; kernel
    /// condition 22.
    ThmAlpha,
    /// `A_0` weighted by `n_k(k-1)`; kernel condition 43.
    ThmBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheckConfig {
    pub threshold: f64,
    pub kernel: KernelWeight,
    /// Required by `ThmAlpha`, ignored by `ThmBeta`.
    #[serde(default)]
    pub c: Option<f64>,
    pub mode: TheoremMode,
    #[serde(default = "default_check_r_max")]
    pub r_max: f64,
    #[serde(default = "default_check_radial")]
    pub radial_n: usize,
    #[serde(default = "default_check_angular")]
    pub angular_n: usize,
}

fn default_check_r_max() -> f64 {
    0.999
}

fn default_check_radial() -> usize {
    32
}

fn default_check_angular() -> usize {
    32
}

impl ConditionCheckConfig {
    pub fn new(threshold: f64, kernel: KernelWeight, mode: TheoremMode, c: Option<f64>) -> Self {
        ConditionCheckConfig {
            threshold,
            kernel,
            c,
            mode,
            r_max: default_check_r_max(),
            radial_n: default_check_radial(),
            angular_n: default_check_angular(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::invalid(format!("threshold must be > 0, got {}", self.threshold)));
        }
        if self.mode == TheoremMode::ThmAlpha {
            match self.c {
                None => return Err(Error::invalid("thm_alpha needs c")),
                Some(c) if !(c > 1.0 && c < 1.5) => {
                    return Err(Error::invalid(format!("c outside (1,3/2): {c}")))
                }
                _ => {}
            }
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::invalid(format!("r_max = {} outside (0, 1)", self.r_max)));
        }
        if self.radial_n < 4 || self.angular_n < 4 {
            return Err(Error::invalid("radial_n and angular_n must be >= 4"));
        }
        self.kernel.validate()
    }
}

/// Exponent of `(1 - |z|^2)` multiplying `|A_j|`.
pub fn weight_exponent(eq: &EquationSpec, j: usize, mode: TheoremMode, c: Option<f64>) -> f64 {
    let n_k = eq.n_k();
    let k = eq.k as f64;
    if j >= 1 {
        return n_k * (k - j as f64);
    }
    match mode {
        TheoremMode::ThmAlpha => n_k * (k - c.unwrap_or(1.0)),
        TheoremMode::ThmBeta => n_k * (k - 1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVerdict {
    pub j: usize,
    pub weight_exponent: f64,
    /// Weighted supremum on the largest disk.
    pub sup: f64,
    pub argmax: Complex64,
    /// `(radius, sup)` on the nested disks `1 - 10^-m` up to `r_max`.
    pub nested: Vec<(f64, f64)>,
    /// The nested suprema keep growing with the maximizer on the boundary.
    pub unbounded: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub mode: TheoremMode,
    pub threshold: f64,
    pub c: Option<f64>,
    pub coefficients: Vec<CoefficientVerdict>,
    pub kernel: ConditionVerdict,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn nested_radii(r_max: f64) -> Vec<f64> {
    let mut radii: Vec<f64> = (1..16).map(|m| 1.0 - 10f64.powi(-m)).take_while(|&r| r < r_max).collect();
    radii.push(r_max);
    radii
}

/// Weighted coefficient suprema against `cfg.threshold` plus the kernel
/// condition of the selected theorem.
pub fn check_hypotheses(eq: &EquationSpec, cfg: &ConditionCheckConfig) -> Result<HypothesisCheck> {
    eq.validate_shape()?;
    cfg.validate()?;
    let n_k = eq.n_k();
    for j in 0..eq.k {
        let n_j = eq.exponents[j];
        if !(n_k >= n_j && n_j > 1.0) {
            return Err(Error::hypothesis(format!(
                "need n_k >= n_j > 1 for all j < k, got n_{j} = {n_j}, n_k = {n_k}"
            )));
        }
    }
    let r_top = cfg.r_max.min(eq.trusted_radius());
    let radii = nested_radii(r_top);
    let grids: Vec<DiskGrid> = radii
        .iter()
        .map(|&r| disk_quadrature(r, cfg.radial_n, cfg.angular_n, None))
        .collect::<Result<_>>()?;
    let mut coefficients = Vec::with_capacity(eq.k);
    for (j, a) in eq.coefficients.iter().enumerate() {
        let w = weight_exponent(eq, j, cfg.mode, cfg.c);
        let mut nested = Vec::with_capacity(radii.len());
        let mut last = None;
        for (grid, &r) in grids.iter().zip(&radii) {
            let sup = sup_search(grid, |z| (1.0 - z.norm_sqr()).max(0.0).powf(w) * a.eval_unchecked(z).norm());
            nested.push((r, sup.value));
            last = Some(sup);
        }
        let last = last.expect("at least one radius");
        let increasing = nested.windows(2).all(|p| p[1].1 > p[0].1);
        let unbounded = nested.len() >= 2 && increasing && {
            let (prev, cur) = (nested[nested.len() - 2].1, nested[nested.len() - 1].1);
            (cur - prev) > 1e-3 * prev.abs() && last.argmax.norm() >= r_top * (1.0 - 1e-9)
        };
        coefficients.push(CoefficientVerdict {
            j,
            weight_exponent: w,
            sup: last.value,
            argmax: last.argmax,
            nested,
            unbounded,
            pass: !unbounded && last.value <= cfg.threshold,
        });
    }
    let kernel = match cfg.mode {
        TheoremMode::ThmAlpha => condition_22(&cfg.kernel, cfg.c.expect("validated"))?,
        TheoremMode::ThmBeta => condition_43(&cfg.kernel)?,
    };
    let pass = coefficients.iter().all(|c| c.pass) && kernel.pass;
    let mut notes = vec![
        "weights follow the displayed exponents n_k(k-j), not the subscript k-j of the coefficient norm".to_string(),
    ];
    for c in coefficients.iter().filter(|c| c.unbounded) {
        notes.push(format!("A_{}: sup unbounded on grid, growing", c.j));
    }
    Ok(HypothesisCheck {
        mode: cfg.mode,
        threshold: cfg.threshold,
        c: cfg.c,
        coefficients,
        kernel,
        pass,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    BoundedLooking,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub r_max: f64,
    pub value: f64,
    /// Base point attaining the maximum over the `a` grid.
    pub argmax: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipScan {
    pub points: Vec<ScanPoint>,
    /// Least-squares slope of `ln value` against `ln(1/(1-r_max))`.
    pub slope: f64,
    pub trend: Trend,
    pub derivative_order: usize,
    pub kernel: String,
    /// Smallest ray reach, when some ray stopped before the largest `r_max`.
    pub truncated_at: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub tol: f64,
    /// Gauss points per radial panel.
    pub radial_n: usize,
    /// Number of rays.
    pub angular_n: usize,
    /// Derivative in the integrand; defaults to 1.
    pub derivative_order: Option<usize>,
    /// `f(0), ..., f^(k-1)(0)`
    pub init: Vec<Complex64>,
}

impl ScanSettings {
    pub fn new(init: Vec<Complex64>) -> Self {
        ScanSettings {
            tol: 1e-10,
            radial_n: 24,
            angular_n: 128,
            derivative_order: None,
            init,
        }
    }
}

/// Slope and trend of `ln value` against `ln(1/(1-r))`.
pub fn classify_trend(points: &[(f64, f64)]) -> (f64, Trend) {
    if points.iter().all(|p| p.1 == 0.0) {
        return (0.0, Trend::BoundedLooking);
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(r, v)| ((1.0 / (1.0 - r)).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, Trend::Inconclusive);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let trend = if slope < 0.05 {
        Trend::BoundedLooking
    } else if slope > 0.5 {
        Trend::Growing
    } else {
        Trend::Inconclusive
    };
    (slope, trend)
}

/// `sup_a int_{|z|<r} |f^(m)|^2 (1-|z|^2)^(2m-2) K(1-|phi_a(z)|^2) dsigma`
/// for each `r` in `r_max_seq`, with `f` taken from a ray fan solved once
/// out to the largest radius.
pub fn membership_scan(
    eq: &EquationSpec,
    kernel: &KernelWeight,
    a_grid: &[Complex64],
    r_max_seq: &[f64],
    settings: &ScanSettings,
) -> Result<MembershipScan> {
    eq.validate_shape()?;
    kernel.validate()?;
    if r_max_seq.is_empty() || r_max_seq.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("r_max values must be strictly increasing"));
    }
    if a_grid.is_empty() || a_grid.iter().any(|a| !(a.norm() < 1.0)) {
        return Err(Error::invalid("base points must be a nonempty set inside the disk"));
    }
    let order = settings.derivative_order.unwrap_or(1);
    if order < 1 || order > eq.k {
        return Err(Error::invalid(format!("derivative order {order} outside 1..={}", eq.k)));
    }
    let last = *r_max_seq.last().expect("nonempty");
    let grid = DiskGrid::composite(last, &r_max_seq[..r_max_seq.len() - 1], settings.radial_n, settings.angular_n)?;
    let thetas = grid.angles();
    let opts = RayOptions {
        report_radii: grid.radii(),
        ..RayOptions::with_tol(settings.tol)
    };
    let init = settings.init.clone();
    let rays: Vec<RaySolution> = solve_fan(eq, &thetas, 0.0, last, |_| init.clone(), &opts)
        .into_iter()
        .collect::<Result<_>>()?;
    let reach = rays.iter().map(RaySolution::reach).fold(f64::INFINITY, f64::min);
    let truncated_at = rays.iter().any(|r| r.truncated.is_some()).then_some(reach);

    // |f^(m)|^2 (1-|z|^2)^(2m-2) at every node, NaN beyond the reach
    let n_rays = thetas.len();
    let weight_exp = 2.0 * order as f64 - 2.0;
    let density: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|n| {
            let ray = ((n.theta * n_rays as f64 / (2.0 * PI)).round() as usize) % n_rays;
            match rays[ray].sample_at(n.r) {
                Some(s) => s.derivs[order].norm_sqr() * (1.0 - n.r * n.r).powf(weight_exp),
                None => f64::NAN,
            }
        })
        .collect();
    let per_a: Vec<Vec<f64>> = a_grid
        .par_iter()
        .map(|&a| {
            let map = MobiusMap::new(a)?;
            let mut i = 0;
            let panels = grid.integrate_by_panel(|n| {
                let d = density[i];
                i += 1;
                d * kernel.eval(map.one_minus_abs_sq(n.z))
            });
            let mut acc = 0.0;
            Ok(panels
                .into_iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    for (p, &r) in r_max_seq.iter().enumerate() {
        if r > reach {
            break;
        }
        let (mut value, mut argmax) = (f64::NEG_INFINITY, a_grid[0]);
        for (vals, &a) in per_a.iter().zip(a_grid) {
            if vals[p] > value {
                value = vals[p];
                argmax = a;
            }
        }
        points.push(ScanPoint { r_max: r, value, argmax });
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.r_max, p.value)).collect();
    let (slope, trend) = classify_trend(&pairs);
    let mut notes = vec!["empirical: finite radii cannot establish membership".to_string()];
    if let Some(r) = truncated_at {
        notes.push(format!("scan truncated: a ray stopped at r = {r}"));
    }
    Ok(MembershipScan {
        points,
        slope,
        trend,
        derivative_order: order,
        kernel: kernel.label(),
        truncated_at,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticFn;
    use crate::spaces::default_a_grid;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rot_eq() -> EquationSpec {
        EquationSpec::uniform(1, 2.0, vec![AnalyticFn::constant(0.5, 0.0)]).unwrap()
    }

    #[test]
    fn weight_for_last_lower_derivative() {
        let eq = EquationSpec::uniform(3, 2.5, vec![AnalyticFn::zero(), AnalyticFn::zero(), AnalyticFn::constant(1.0, 0.0)])
            .unwrap();
        let w = weight_exponent(&eq, 2, TheoremMode::ThmAlpha, Some(1.2));
        for &z in &[c(0.3), Complex64::new(-0.2, 0.7), Complex64::new(0.61, -0.5)] {
            let direct = (1.0 - z.norm_sqr()).powf(eq.n_k());
            assert!(((1.0 - z.norm_sqr()).powf(w) - direct).abs() <= 1e-12);
        }
        assert_eq!(weight_exponent(&eq, 0, TheoremMode::ThmAlpha, Some(1.25)), 2.5 * 1.75);
        assert_eq!(weight_exponent(&eq, 0, TheoremMode::ThmBeta, Some(1.25)), 5.0);
    }

    #[test]
    fn config_rejects_bad_c() {
        let k = KernelWeight::power(0.5).unwrap();
        let err = ConditionCheckConfig::new(1.0, k.clone(), TheoremMode::ThmAlpha, Some(2.0)).validate().unwrap_err();
        assert!(err.to_string().contains("c outside (1,3/2)"));
        assert!(ConditionCheckConfig::new(1.0, k.clone(), TheoremMode::ThmAlpha, None).validate().is_err());
        assert!(ConditionCheckConfig::new(1.0, k, TheoremMode::ThmBeta, Some(2.0)).validate().is_ok());
    }

    #[test]
    fn exponent_pattern_enforced() {
        let eq = EquationSpec::uniform(1, 1.0, vec![AnalyticFn::constant(1.0, 0.0)]).unwrap();
        let cfg = ConditionCheckConfig::new(1.0, KernelWeight::power(2.0).unwrap(), TheoremMode::ThmBeta, None);
        assert!(matches!(check_hypotheses(&eq, &cfg), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn constant_coefficient_against_threshold() {
        let delta = 0.01;
        let eq = EquationSpec::uniform(2, 2.0, vec![AnalyticFn::constant(delta, 0.0), AnalyticFn::zero()]).unwrap();
        // condition 22 at c = 1.25 needs p < 1/2
        let kernel = KernelWeight::power(0.25).unwrap();
        let check = |tau| {
            check_hypotheses(&eq, &ConditionCheckConfig::new(tau, kernel.clone(), TheoremMode::ThmAlpha, Some(1.25)))
                .unwrap()
        };
        let at = check(delta);
        assert!((at.coefficients[0].sup - delta).abs() < 1e-15);
        assert!(at.pass);
        assert!(!check(0.5 * delta).pass);
    }

    #[test]
    fn negative_weight_blows_up() {
        let eq = EquationSpec::uniform(1, 2.0, vec![AnalyticFn::constant(1.0, 0.0)]).unwrap();
        let cfg = ConditionCheckConfig::new(10.0, KernelWeight::power(0.5).unwrap(), TheoremMode::ThmAlpha, Some(1.25));
        let out = check_hypotheses(&eq, &cfg).unwrap();
        let a0 = &out.coefficients[0];
        assert_eq!(a0.weight_exponent, -0.5);
        assert!(a0.unbounded);
        assert!(!out.pass);
        // (1 - r^2)^(-1/2) at r = 0.999
        assert!((a0.sup - (1.0 - 0.999f64.powi(2)).powf(-0.5)).abs() < 1e-9);
        assert!(out.notes.iter().any(|n| n.contains("sup unbounded on grid, growing")));
    }

    #[test]
    fn beta_mode_square_kernel() {
        let eq = EquationSpec::uniform(1, 2.0, vec![AnalyticFn::constant(0.1, 0.0)]).unwrap();
        let cfg = ConditionCheckConfig::new(1.0, KernelWeight::power(2.0).unwrap(), TheoremMode::ThmBeta, None);
        let out = check_hypotheses(&eq, &cfg).unwrap();
        assert_eq!(out.kernel.value, Some(0.5));
        assert!(out.kernel.pass);
        assert!(out.pass);
    }

    #[test]
    fn zero_solution_scans_to_zero() {
        let eq = EquationSpec::uniform(2, 2.0, vec![AnalyticFn::constant(0.01, 0.0), AnalyticFn::zero()]).unwrap();
        let settings = ScanSettings {
            angular_n: 16,
            radial_n: 8,
            ..ScanSettings::new(vec![c(0.0), c(0.0)])
        };
        let scan = membership_scan(&eq, &KernelWeight::power(0.5).unwrap(), &[c(0.0)], &[0.9, 0.99], &settings).unwrap();
        assert!(scan.points.iter().all(|p| p.value == 0.0));
        assert_eq!(scan.trend, Trend::BoundedLooking);
    }

    #[test]
    fn rotation_instance_matches_closed_form() {
        // f = exp(i z / sqrt 2): |f'|^2 = exp(-sqrt 2 r sin theta) / 2, K = 1, a = 0
        let seq = [0.9, 0.99, 0.999];
        let settings = ScanSettings {
            angular_n: 64,
            ..ScanSettings::new(vec![c(1.0)])
        };
        let scan = membership_scan(&rot_eq(), &KernelWeight::constant(1.0).unwrap(), &[c(0.0)], &seq, &settings).unwrap();
        let grid = DiskGrid::composite(0.999, &[0.9, 0.99], 24, 64).unwrap();
        let panels = grid.integrate_by_panel(|n| 0.5 * (-(2f64.sqrt()) * n.r * n.theta.sin()).exp());
        let mut acc = 0.0;
        let mut exact = Vec::new();
        for ((p, pt), &r) in panels.iter().zip(&scan.points).zip(&seq) {
            acc += p;
            assert!((pt.value - acc).abs() < 1e-8 * acc, "{} vs {acc}", pt.value);
            exact.push((r, acc));
        }
        // |f'| is not constant off the real axis, so the slope sits just above 0.05
        let (slope, trend) = classify_trend(&exact);
        assert!((scan.slope - slope).abs() < 1e-6);
        assert_eq!(scan.trend, trend);
        assert!(scan.notes[0].starts_with("empirical"));
    }

    #[test]
    fn trend_thresholds() {
        let growing: Vec<(f64, f64)> = [0.9, 0.99, 0.999].iter().map(|&r| (r, 1.0 / (1.0 - r))).collect();
        let (s, t) = classify_trend(&growing);
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(t, Trend::Growing);
        let flat: Vec<(f64, f64)> = [0.9, 0.99].iter().map(|&r| (r, 2.0)).collect();
        assert_eq!(classify_trend(&flat).1, Trend::BoundedLooking);
    }

    #[test]
    fn scan_values_nondecreasing() {
        let eq = EquationSpec::uniform(2, 2.0, vec![AnalyticFn::constant(1e-3, 0.0), AnalyticFn::constant(1e-3, 0.0)])
            .unwrap();
        let settings = ScanSettings {
            angular_n: 32,
            radial_n: 12,
            ..ScanSettings::new(vec![c(1.0), Complex64::new(0.3, 0.2)])
        };
        let seq = [0.5, 0.8, 0.9, 0.99];
        let scan = membership_scan(&eq, &KernelWeight::power(0.5).unwrap(), &default_a_grid(), &seq, &settings).unwrap();
        assert_eq!(scan.points.len(), 4);
        assert!(scan.points.windows(2).all(|w| w[1].value >= w[0].value));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn threshold_monotone(delta in 1e-4f64..0.5, tau in 1e-4f64..0.5, bump in 0.0f64..1.0) {
            let eq = EquationSpec::uniform(2, 2.0, vec![AnalyticFn::constant(delta, 0.0), AnalyticFn::log_pole(delta)]).unwrap();
            let kernel = KernelWeight::power(0.5).unwrap();
            let mk = |t| ConditionCheckConfig { radial_n: 8, angular_n: 8, r_max: 0.99, ..ConditionCheckConfig::new(t, kernel.clone(), TheoremMode::ThmAlpha, Some(1.3)) };
            let lo = check_hypotheses(&eq, &mk(tau)).unwrap();
            let hi = check_hypotheses(&eq, &mk(tau + bump)).unwrap();
            prop_assert!(!lo.pass || hi.pass);
        }
    }
}
