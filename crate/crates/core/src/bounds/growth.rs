//! Exponential growth estimates along a ray for equations with all
//! exponents equal to `n_0 > 1`.
//!
//! With `h(t) = max_j n_0 |A_j(t e^{i theta})|^{1/(k-j)}` the basic estimate is
//! `|f(r e^{i theta})|^{n_0} <= C exp(n_c int_nu^r h)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cumulative_integral, sup_on_interval, BoundPoint, BoundReport, BoundStatus};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::ray_solver::{EquationSpec, RaySolution};

/// `(e - 1)/(e + 1)`, the radius from which the Bloch estimate is
/// simplified to a logarithm.
pub const C0: f64 = 0.462_117_157_260_009_74;

const SUP_SAMPLES: usize = 64;

fn common_exponent(eq: &EquationSpec) -> Result<f64> {
    let n0 = eq.exponents[0];
    if !(n0 > 1.0) || eq.exponents.iter().any(|&n| n != n0) {
        return Err(Error::hypothesis(format!(
            "growth estimates need n_j = n_0 > 1 for all j, got {:?}",
            eq.exponents
        )));
    }
    Ok(n0)
}

/// `max_j n_0 |A_j(x e^{i theta})|^{1/(k-j)}`
pub fn h_theta(eq: &EquationSpec, theta: f64, x: f64) -> f64 {
    let n0 = eq.exponents[0];
    let z = Complex64::from_polar(x, theta);
    (0..eq.k)
        .map(|j| n0 * eq.coefficients[j].eval_unchecked(z).norm().powf(1.0 / (eq.k - j) as f64))
        .fold(0.0, f64::max)
}

/// The maximum over `j` in the constant:
/// `max_j |f^(j)(z_theta)|^{n_0} / (n_c^j max_n n_0^j |A_n(z_theta)|^{j/(k-n)})`.
fn initial_max(eq: &EquationSpec, sol: &RaySolution) -> Result<f64> {
    let n0 = eq.exponents[0];
    let z = Complex64::from_polar(sol.nu, sol.theta);
    let a: Vec<f64> = eq.coefficients.iter().map(|c| c.eval_unchecked(z).norm()).collect();
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::precondition(format!(
            "every coefficient vanishes at z_theta = {z}"
        )));
    }
    let first = sol
        .samples
        .first()
        .ok_or_else(|| Error::precondition("empty ray solution"))?;
    let n_c = eq.n_c() as f64;
    let mut best = 0.0f64;
    for j in 0..eq.k {
        let denom = if j == 0 {
            1.0
        } else {
            let jf = j as f64;
            let m = (0..eq.k)
                .map(|n| n0.powf(jf) * a[n].powf(jf / (eq.k - n) as f64))
                .fold(0.0, f64::max);
            n_c.powf(jf) * m
        };
        best = best.max(first.derivs[j].norm().powf(n0) / denom);
    }
    Ok(best)
}

/// `C = (1 + eps) n_0^k max_j (...)` of the basic estimate.
pub fn growth_constant(eq: &EquationSpec, sol: &RaySolution, epsilon: f64) -> Result<f64> {
    let n0 = common_exponent(eq)?;
    check_epsilon(epsilon)?;
    Ok((1.0 + epsilon) * n0.powi(eq.k as i32) * initial_max(eq, sol)?)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(())
}

fn finish(mut report: BoundReport, sol: &RaySolution) -> BoundReport {
    if let Some(t) = &sol.truncated {
        report.truncated_at = Some(t.last_good_r);
        report.notes.push(format!("ray truncated: {}", t.reason));
    }
    report
}

/// `|f|^{n_0} <= C exp(n_c int_nu^r h)` at every sample of `sol`.
pub fn growth_bound(eq: &EquationSpec, sol: &RaySolution, epsilon: f64) -> Result<BoundReport> {
    let c = growth_constant(eq, sol, epsilon)?;
    let n0 = eq.exponents[0];
    let n_c = eq.n_c() as f64;
    let radii = sol.radii();
    let integral = cumulative_integral(|t| h_theta(eq, sol.theta, t), &radii);
    let points = sol
        .samples
        .iter()
        .zip(&integral)
        .map(|(s, i)| BoundPoint::new(s.r, Some(0), s.derivs[0].norm().powf(n0), c * (n_c * i).exp()))
        .collect();
    let report = BoundReport::from_points("growth", sol.theta, points).note(format!("C = {c:.16e}, epsilon = {epsilon}"));
    Ok(finish(report, sol))
}

/// `|f^(j)|^{n_0} <= C_j (sup_{nu <= x <= (1+r)/2} h)^j exp(n_c int_nu^r h)`
/// for `j = 0..=k`, with `C_j = (1 + eps) n_c^j n_0^{k-j} max_j (...)`.
pub fn derivative_growth_bound(eq: &EquationSpec, sol: &RaySolution, epsilon: f64) -> Result<Vec<BoundReport>> {
    let n0 = common_exponent(eq)?;
    check_epsilon(epsilon)?;
    let base = initial_max(eq, sol)?;
    let n_c = eq.n_c() as f64;
    let radii = sol.radii();
    let h = |t: f64| h_theta(eq, sol.theta, t);
    let integral = cumulative_integral(h, &radii);
    let sups: Vec<f64> = radii
        .iter()
        .map(|&r| sup_on_interval(h, sol.nu, 0.5 * (1.0 + r), SUP_SAMPLES))
        .collect();
    let mut reports = Vec::with_capacity(eq.k + 1);
    for j in 0..=eq.k {
        let c = (1.0 + epsilon) * n_c.powi(j as i32) * n0.powi((eq.k - j) as i32) * base;
        let points = sol
            .samples
            .iter()
            .zip(integral.iter().zip(&sups))
            .map(|(s, (i, sup))| {
                BoundPoint::new(s.r, Some(j), s.derivs[j].norm().powf(n0), c * sup.powi(j as i32) * (n_c * i).exp())
            })
            .collect();
        let report = BoundReport::from_points(format!("derivative_growth_{j}"), sol.theta, points)
            .note(format!("C_{j} = {c:.16e}, epsilon = {epsilon}"));
        reports.push(finish(report, sol));
    }
    Ok(reports)
}

/// `exp(n_c n_0 max(L, 1) int_nu^r (1 - t^2)^{-s} dt)`
pub fn hinf_exponential_factor(n_c: usize, n0: f64, l: f64, s: f64, nu: f64, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::domain(format!("weight s must lie in [0, 1), got {s}")));
    }
    let integral = integrate_adaptive(|t| (1.0 - t * t).powf(-s), nu, r, 1e-15, 1e-14).value;
    Ok((n_c as f64 * n0 * l.max(1.0) * integral).exp())
}

/// Growth estimate with coefficients bounded by `L / (1 - |z|^2)^s`,
/// `L = max_j coefficient_norms[j]`.
pub fn hinf_growth_bound(
    eq: &EquationSpec,
    sol: &RaySolution,
    s: f64,
    coefficient_norms: &[f64],
    epsilon: f64,
) -> Result<BoundReport> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::domain(format!("weight s must lie in [0, 1), got {s}")));
    }
    if coefficient_norms.len() != eq.k || coefficient_norms.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("need one finite nonnegative norm per coefficient"));
    }
    let c = growth_constant(eq, sol, epsilon)?;
    let n0 = eq.exponents[0];
    let l = coefficient_norms.iter().cloned().fold(0.0, f64::max);
    let mut points = Vec::with_capacity(sol.samples.len());
    let mut majorized = true;
    for smp in &sol.samples {
        let factor = hinf_exponential_factor(eq.n_c(), n0, l, s, sol.nu, smp.r)?;
        points.push(BoundPoint::new(smp.r, Some(0), smp.derivs[0].norm().powf(n0), c * factor));
        let z = Complex64::from_polar(smp.r, sol.theta);
        let w = (1.0 - smp.r * smp.r).powf(s);
        majorized &= eq.coefficients.iter().all(|a| a.eval_unchecked(z).norm() * w <= l * (1.0 + 1e-9) + 1e-15);
    }
    let mut report = BoundReport::from_points("hinf_growth", sol.theta, points)
        .note(format!("C = {c:.16e}, L = {l:.16e}, integrand scaled by max(L, 1)"));
    if !majorized {
        report.withhold(BoundStatus::HypothesesUnmet, "some |A_j| (1-r^2)^s exceeds L on the ray");
    }
    Ok(finish(report, sol))
}

fn log_majorant(m: f64, x: f64) -> f64 {
    0.5 * m * ((1.0 + x) / (1.0 - x)).ln()
}

fn bloch_h(m: f64, k: usize, x: f64) -> f64 {
    let base = log_majorant(m, x);
    (0..k).map(|j| base.powf(1.0 / (k - j) as f64)).fold(0.0, f64::max)
}

/// `int_nu^r max_j ((M/2) log((1+t)/(1-t)))^{1/(k-j)} dt`
pub fn bloch_inner_integral(m: f64, k: usize, nu: f64, r: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain(format!("Bloch bound M must be > 0, got {m}")));
    }
    Ok(integrate_adaptive(|t| bloch_h(m, k, t), nu, r, 1e-15, 1e-14).value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochGrowthReport {
    pub report: BoundReport,
    /// `(r, rhs(r) / log(1/(1-r)))` for samples with `r >= C0`.
    pub log_ratios: Vec<(f64, f64)>,
    /// Largest such ratio: the constant of the logarithmic form.
    pub c_fit: Option<f64>,
}

/// `|f'|^{n_0} <= C sup_{[nu,(1+r)/2]} g * exp(n_c int_nu^r g)` with
/// `g(x) = max_j n_0 ((M/2) log((1+x)/(1-x)))^{1/(k-j)}` and
/// `C = (1 + eps) n_c n_0^{k-1} max_j (...)`.
pub fn bloch_growth_bound(eq: &EquationSpec, sol: &RaySolution, m: f64, epsilon: f64) -> Result<BlochGrowthReport> {
    if !(m > 0.0) {
        return Err(Error::domain(format!("Bloch bound M must be > 0, got {m}")));
    }
    let n0 = common_exponent(eq)?;
    check_epsilon(epsilon)?;
    let n_c = eq.n_c() as f64;
    let c = (1.0 + epsilon) * n_c * n0.powi(eq.k as i32 - 1) * initial_max(eq, sol)?;
    let g = |x: f64| n0 * bloch_h(m, eq.k, x);
    let radii = sol.radii();
    let integral = cumulative_integral(g, &radii);
    let mut points = Vec::with_capacity(radii.len());
    let mut log_ratios = Vec::new();
    let mut majorized = true;
    for (smp, i) in sol.samples.iter().zip(&integral) {
        let sup = sup_on_interval(g, sol.nu, 0.5 * (1.0 + smp.r), SUP_SAMPLES);
        let rhs = c * sup * (n_c * i).exp();
        points.push(BoundPoint::new(smp.r, Some(1), smp.derivs[1].norm().powf(n0), rhs));
        if smp.r >= C0 {
            log_ratios.push((smp.r, rhs / (1.0 / (1.0 - smp.r)).ln()));
        }
        let z = Complex64::from_polar(smp.r, sol.theta);
        let bound = log_majorant(m, smp.r);
        majorized &= eq.coefficients.iter().all(|a| a.eval_unchecked(z).norm() <= bound * (1.0 + 1e-9) + 1e-15);
    }
    let c_fit = log_ratios.iter().map(|p| p.1).reduce(f64::max);
    let mut report = BoundReport::from_points("bloch_growth", sol.theta, points)
        .note(format!("C = {c:.16e}, M = {m}, epsilon = {epsilon}"));
    if !majorized {
        report.withhold(
            BoundStatus::HypothesesUnmet,
            "some |A_j(z)| exceeds (M/2) log((1+|z|)/(1-|z|)) on the ray",
        );
    }
    Ok(BlochGrowthReport {
        report: finish(report, sol),
        log_ratios,
        c_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticFn;
    use crate::ray_solver::{solve_ray, solve_ray_with, RayOptions};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn k1(a0: AnalyticFn) -> EquationSpec {
        EquationSpec::uniform(1, 2.0, vec![a0]).unwrap()
    }

    #[test]
    fn c0_value() {
        let e = std::f64::consts::E;
        assert!((C0 - (e - 1.0) / (e + 1.0)).abs() < 1e-15);
        assert!((C0 - 0.4621171573).abs() < 1e-10);
    }

    #[test]
    fn bounded_solution_passes() {
        let eq = k1(AnalyticFn::constant(0.5, 0.0));
        let sol = solve_ray(&eq, 0.0, 0.0, 0.99, &[c(1.0)], 1e-11).unwrap();
        let report = growth_bound(&eq, &sol, 0.1).unwrap();
        assert!(report.pass);
        assert!((growth_constant(&eq, &sol, 0.1).unwrap() - 2.2).abs() < 1e-14);
        for p in &report.points {
            assert!((p.rhs - 2.2 * p.r.exp()).abs() < 1e-9 * p.rhs);
        }
    }

    #[test]
    fn exponential_solution_passes() {
        let eq = k1(AnalyticFn::constant(-1.0, 0.0));
        let sol = solve_ray(&eq, 0.7, 0.0, 0.99, &[c(1.0)], 1e-11).unwrap();
        let report = growth_bound(&eq, &sol, 0.1).unwrap();
        assert!(report.pass);
        let last = report.points.last().unwrap();
        let z = Complex64::from_polar(last.r, 0.7);
        assert!((last.lhs - z.exp().norm().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn epsilon_orders_rhs() {
        let eq = k1(AnalyticFn::constant(-1.0, 0.0));
        let sol = solve_ray(&eq, 0.0, 0.0, 0.9, &[c(1.0)], 1e-10).unwrap();
        let lo = growth_bound(&eq, &sol, 0.1).unwrap();
        let hi = growth_bound(&eq, &sol, 0.5).unwrap();
        assert!(lo.points.iter().zip(&hi.points).all(|(a, b)| b.rhs > a.rhs));
    }

    #[test]
    fn rhs_nondecreasing_in_r() {
        let a = AnalyticFn::series(crate::analytic::PowerSeries::from_real(&[0.3, -0.8, 0.5]));
        let eq = k1(a);
        let sol = solve_ray(&eq, 2.0, 0.1, 0.95, &[c(0.7)], 1e-10).unwrap();
        let report = growth_bound(&eq, &sol, 0.2).unwrap();
        assert!(report.points.windows(2).all(|w| w[1].rhs >= w[0].rhs));
    }

    #[test]
    fn vanishing_coefficients_at_start_rejected() {
        let eq = k1(AnalyticFn::log_pole(1.0));
        let sol = solve_ray(&eq, 0.0, 0.0, 0.9, &[c(1.0)], 1e-10).unwrap();
        assert!(matches!(growth_bound(&eq, &sol, 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn pattern_violation_rejected() {
        let eq = EquationSpec::new(1, vec![2.0, 3.0], vec![AnalyticFn::constant(1.0, 0.0)]).unwrap();
        let sol = solve_ray(&eq, 0.0, 0.0, 0.5, &[c(1.0)], 1e-10).unwrap();
        assert!(matches!(growth_bound(&eq, &sol, 0.1), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn derivative_bounds() {
        let eq = k1(AnalyticFn::constant(0.5, 0.0));
        let sol = solve_ray(&eq, 0.0, 0.0, 0.95, &[c(1.0)], 1e-11).unwrap();
        let reports = derivative_growth_bound(&eq, &sol, 0.1).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.pass));
        let g0 = growth_bound(&eq, &sol, 0.1).unwrap();
        for (a, b) in reports[0].points.iter().zip(&g0.points) {
            assert!((a.rhs - b.rhs).abs() <= 1e-15 * b.rhs);
        }
        // the sup factor is 1 for this instance: rhs_1 / rhs_0 = n_c / n_0
        for (a, b) in reports[1].points.iter().zip(&reports[0].points) {
            assert!((a.rhs / b.rhs - 0.5).abs() < 1e-14);
            assert!((a.lhs - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn hinf_factor_and_bound() {
        let v = hinf_exponential_factor(1, 2.0, 1.0, 0.5, 0.0, 0.5).unwrap();
        assert!((v - (std::f64::consts::PI / 3.0).exp()).abs() < 1e-6);
        assert!((v - 2.8497).abs() < 1e-4);
        let flat = hinf_exponential_factor(2, 2.0, 0.3, 0.0, 0.1, 0.6).unwrap();
        assert!((flat - (2.0 * 2.0 * 0.5f64).exp()).abs() < 1e-12);
        assert!(hinf_exponential_factor(1, 2.0, 1.0, 1.0, 0.0, 0.5).is_err());

        let eq = k1(AnalyticFn::constant(0.5, 0.0));
        let sol = solve_ray(&eq, 0.0, 0.0, 0.99, &[c(1.0)], 1e-10).unwrap();
        let report = hinf_growth_bound(&eq, &sol, 0.5, &[0.5], 0.1).unwrap();
        assert!(report.pass);
        let unmet = hinf_growth_bound(&eq, &sol, 0.5, &[0.1], 0.1).unwrap();
        assert_eq!(unmet.status, BoundStatus::HypothesesUnmet);
    }

    #[test]
    fn bloch_inner_integral_closed_form() {
        let v = bloch_inner_integral(2.0, 1, 0.0, 0.5).unwrap();
        let exact = 1.5 * 1.5f64.ln() + 0.5 * 0.5f64.ln();
        assert!((v - exact).abs() < 1e-12);
        assert!((v - 0.261624).abs() < 1e-6);
        assert!(bloch_inner_integral(0.0, 1, 0.0, 0.5).is_err());
    }

    #[test]
    fn bloch_bound_on_log_coefficient() {
        let eq = k1(AnalyticFn::log_pole(1.0));
        let opts = RayOptions::with_tol(1e-10);
        let sol = solve_ray_with(&eq, 0.0, 0.1, 0.99, &[c(1.0)], &opts).unwrap();
        let out = bloch_growth_bound(&eq, &sol, 2.0, 0.1).unwrap();
        assert!(out.report.pass, "margin {}", out.report.margin);
        assert!(out.c_fit.is_some());
        assert!(bloch_growth_bound(&eq, &sol, -1.0, 0.1).is_err());
    }

    #[test]
    fn bloch_small_m_limit() {
        let eq = k1(AnalyticFn::constant(0.25, 0.0));
        let sol = solve_ray(&eq, 0.0, 0.0, 0.9, &[c(1.0)], 1e-10).unwrap();
        let mut prev = f64::INFINITY;
        for m in [1.0, 0.1, 0.01, 0.001] {
            // exp(n_c int g) = rhs / (C sup g) tends to 1 as M -> 0
            let out = bloch_growth_bound(&eq, &sol, m, 0.1).unwrap();
            let p = out.report.points.last().unwrap();
            let g = |x: f64| 2.0 * 0.5 * m * ((1.0 + x) / (1.0 - x)).ln();
            let c = 1.1 * 1.0;
            let ratio = p.rhs / (c * g(0.5 * (1.0 + p.r)));
            assert!(ratio >= 1.0 && ratio < prev);
            prev = ratio;
        }
        assert!(prev - 1.0 < 1e-2);
    }
}
