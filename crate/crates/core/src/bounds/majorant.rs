//! Real majorant equations and the comparison between a solution and
//! its majorant.
//!
//! The comparison is stated for `(v^(k))^{n_0} - sum A^*_{k-j} (v^(k-j))^{n_0} = 0`.
//! In terms of our equation `A^* = -A`, which leaves every modulus unchanged.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoundPoint, BoundReport, BoundStatus};
use crate::analytic::AnalyticFn;
use crate::error::{Error, Result};
use crate::ray_solver::{integrate, EquationSpec, OdeSystem, RaySolution, StepControl};

/// A nonnegative real function on `[a, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealCoefficient {
    Constant { value: f64 },
    /// `scale * |A(x e^{i theta})|`
    Modulus { function: AnalyticFn, scale: f64, theta: f64 },
    /// Linear interpolation through `(x, value)`, constant outside.
    Tabulated { x: Vec<f64>, values: Vec<f64> },
}

impl RealCoefficient {
    pub fn constant(value: f64) -> Self {
        RealCoefficient::Constant { value }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RealCoefficient::Constant { value } => *value,
            RealCoefficient::Modulus { function, scale, theta } => {
                scale * function.eval_unchecked(Complex64::from_polar(x, *theta)).norm()
            }
            RealCoefficient::Tabulated { x: xs, values } => {
                if xs.is_empty() {
                    return 0.0;
                }
                let i = xs.partition_point(|&t| t <= x);
                if i == 0 {
                    values[0]
                } else if i == xs.len() {
                    values[xs.len() - 1]
                } else {
                    let (x0, x1) = (xs[i - 1], xs[i]);
                    values[i - 1] + (values[i] - values[i - 1]) * (x - x0) / (x1 - x0)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantProblem {
    pub k: usize,
    pub n0: f64,
    /// Left end `a` of the interval.
    pub a: f64,
    /// `B_0, ..., B_{k-1}`
    pub coefficients: Vec<RealCoefficient>,
    /// Exceptional points, skipped by every check.
    pub exceptional: Vec<f64>,
    /// `u(a), u'(a), ..., u^(k-1)(a)`
    pub init: Vec<f64>,
}

impl MajorantProblem {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.coefficients.len() != self.k || self.init.len() != self.k {
            return Err(Error::invalid("majorant needs k >= 1 with k coefficients and k initial values"));
        }
        if !(self.n0 > 1.0) {
            return Err(Error::invalid(format!("majorant exponent n_0 must be > 1, got {}", self.n0)));
        }
        if !(0.0 <= self.a && self.a < 1.0) {
            return Err(Error::domain(format!("left end a = {} outside [0, 1)", self.a)));
        }
        if self.init.iter().any(|&u| !(u >= 0.0)) {
            return Err(Error::domain("majorant initial values must be nonnegative"));
        }
        Ok(())
    }

    fn is_exceptional(&self, x: f64) -> bool {
        self.exceptional.iter().any(|&e| (e - x).abs() <= 1e-12)
    }
}

/// `u^(0..=k)` on a grid of `x` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantTrajectory {
    pub x: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

impl MajorantTrajectory {
    pub fn at(&self, x: f64) -> Option<&[f64]> {
        self.x
            .binary_search_by(|t| t.total_cmp(&x))
            .ok()
            .map(|i| self.u[i].as_slice())
    }
}

struct Linear<'a> {
    b: &'a [RealCoefficient],
}

impl Linear<'_> {
    fn top(&self, x: f64, y: &[Complex64]) -> f64 {
        self.b.iter().zip(y).map(|(b, u)| b.eval(x) * u.re).sum()
    }
}

impl OdeSystem for Linear<'_> {
    fn rhs(&self, x: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        let k = y.len();
        dy[..k - 1].copy_from_slice(&y[1..]);
        dy[k - 1] = Complex64::new(self.top(x, y), 0.0);
        Ok(())
    }
}

const B_SAMPLES: usize = 257;

/// Solve `u^(k) = sum_j B_j(x) u^(j)` on `[a, x_max]`, reporting at `report`
/// (and at `a`).
pub fn herold_majorant(mp: &MajorantProblem, x_max: f64, tol: f64, report: &[f64]) -> Result<MajorantTrajectory> {
    mp.validate()?;
    if !(mp.a < x_max && x_max < 1.0) {
        return Err(Error::domain(format!("need a < x_max < 1, got a={}, x_max={x_max}", mp.a)));
    }
    for i in 0..B_SAMPLES {
        let x = mp.a + (x_max - mp.a) * i as f64 / (B_SAMPLES - 1) as f64;
        for (j, b) in mp.coefficients.iter().enumerate() {
            let v = b.eval(x);
            if !(v >= 0.0) {
                return Err(Error::domain(format!("B_{j}({x}) = {v} is negative")));
            }
        }
    }
    if let Some(x) = report.iter().find(|&&x| !(mp.a <= x && x <= x_max)) {
        return Err(Error::domain(format!("report point {x} outside [a, x_max]")));
    }
    let mut stops = report.to_vec();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut sys = Linear { b: &mp.coefficients };
    let y0: Vec<Complex64> = mp.init.iter().map(|&u| Complex64::new(u, 0.0)).collect();
    let row = |sys: &Linear, x: f64, y: &[Complex64]| {
        let mut r: Vec<f64> = y.iter().map(|c| c.re).collect();
        r.push(sys.top(x, y));
        r
    };
    let mut traj = MajorantTrajectory {
        x: vec![mp.a],
        u: vec![row(&sys, mp.a, &y0)],
    };
    let ctl = StepControl { tol, max_steps: 1_000_000 };
    let out = integrate(&mut sys, mp.a, &y0, x_max, &stops, ctl, |s, x, y| {
        if stops.binary_search_by(|t| t.total_cmp(&x)).is_ok() || x == x_max {
            traj.x.push(x);
            traj.u.push(row(s, x, y));
        }
        Ok(())
    })?;
    if let Some(reason) = out.halted {
        return Err(Error::precondition(format!("majorant integration stopped: {reason}")));
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Check `|A_{k-j}(x e^{i theta})| <= n_0^{-j} B_{k-j}(x)` at every sample
/// `x` outside the exceptional set, and `|v^(k-j)(a)|^{n_0} <= u^(k-j)(a)`.
pub fn check_majorant_hypotheses(
    mp: &MajorantProblem,
    eq: &EquationSpec,
    theta: f64,
    samples: &[f64],
    v_init: &[Complex64],
) -> Result<HypothesisVerdict> {
    mp.validate()?;
    if eq.k != mp.k || v_init.len() != mp.k {
        return Err(Error::invalid("majorant and equation orders differ"));
    }
    let mut violations = Vec::new();
    if eq.exponents.iter().any(|&n| n != mp.n0) {
        violations.push(format!("equation exponents are not all equal to n_0 = {}", mp.n0));
    }
    for &x in samples.iter().filter(|&&x| !mp.is_exceptional(x)) {
        let z = Complex64::from_polar(x, theta);
        for j in 1..=mp.k {
            let a = eq.coefficients[mp.k - j].eval_unchecked(z).norm();
            let b = mp.coefficients[mp.k - j].eval(x) * mp.n0.powi(-(j as i32));
            if a > b * (1.0 + 1e-12) {
                violations.push(format!("|A_{}({x})| = {a} exceeds n_0^-{j} B = {b}", mp.k - j));
            }
        }
    }
    for (j, (v, u)) in v_init.iter().zip(&mp.init).enumerate() {
        let lhs = v.norm().powf(mp.n0);
        if lhs > u * (1.0 + 1e-12) {
            violations.push(format!("|v^({j})(a)|^n_0 = {lhs} exceeds u^({j})(a) = {u}"));
        }
    }
    Ok(HypothesisVerdict {
        ok: violations.is_empty(),
        violations,
    })
}

/// `|v^(j)(x)|^{n_0} <= n_0^{k-j} u^(j)(x)` for `j = 0..=k` at every `x` where
/// both trajectories have a sample.
pub fn comparison_check(
    v: &RaySolution,
    u: &MajorantTrajectory,
    mp: &MajorantProblem,
    hypotheses: &HypothesisVerdict,
) -> BoundReport {
    let mut points = Vec::new();
    for (x, us) in u.x.iter().zip(&u.u) {
        if mp.is_exceptional(*x) {
            continue;
        }
        let Some(s) = v.sample_at(*x) else { continue };
        for j in 0..=mp.k {
            let lhs = s.derivs[j].norm().powf(mp.n0);
            let rhs = mp.n0.powi((mp.k - j) as i32) * us[j];
            points.push(BoundPoint::new(*x, Some(j), lhs, rhs));
        }
    }
    let mut report = BoundReport::from_points("comparison", v.theta, points);
    report.truncated_at = v.truncated.as_ref().map(|t| t.last_good_r);
    if !hypotheses.ok {
        report.withhold(BoundStatus::HypothesesUnmet, hypotheses.violations.join("; "));
    }
    if report.points.is_empty() {
        report.withhold(BoundStatus::HypothesesUnmet, "no common grid points");
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ray_solver::{solve_ray_with, RayOptions};

    fn simple(k: usize, b: Vec<f64>, init: Vec<f64>) -> MajorantProblem {
        MajorantProblem {
            k,
            n0: 2.0,
            a: 0.0,
            coefficients: b.into_iter().map(RealCoefficient::constant).collect(),
            exceptional: vec![],
            init,
        }
    }

    #[test]
    fn exponential_majorant() {
        let t = herold_majorant(&simple(1, vec![1.0], vec![1.0]), 0.95, 1e-12, &[0.5, 0.9]).unwrap();
        assert!((t.at(0.9).unwrap()[0] - 0.9f64.exp()).abs() < 1e-8);
        assert!((t.at(0.9).unwrap()[0] - 2.4596).abs() < 1e-4);
    }

    #[test]
    fn cosh_majorant() {
        let t = herold_majorant(&simple(2, vec![1.0, 0.0], vec![1.0, 0.0]), 0.9, 1e-12, &[0.5]).unwrap();
        assert!((t.at(0.5).unwrap()[0] - 0.5f64.cosh()).abs() < 1e-8);
        assert!((t.at(0.5).unwrap()[0] - 1.1276260).abs() < 1e-7);
    }

    #[test]
    fn zero_majorant_is_polynomial() {
        let t = herold_majorant(&simple(1, vec![0.0], vec![3.0]), 0.9, 1e-12, &[0.4, 0.8]).unwrap();
        assert!(t.u.iter().all(|u| u[0] == 3.0));
    }

    #[test]
    fn negative_coefficient_rejected() {
        assert!(herold_majorant(&simple(1, vec![-0.1], vec![1.0]), 0.9, 1e-12, &[]).is_err());
    }

    fn pair() -> (EquationSpec, MajorantProblem, Vec<f64>) {
        let eq = EquationSpec::uniform(1, 2.0, vec![AnalyticFn::constant(-0.5, 0.0)]).unwrap();
        let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        (eq, simple(1, vec![1.0], vec![1.0]), grid)
    }

    #[test]
    fn comparison_passes_on_closed_form_pair() {
        let (eq, mp, grid) = pair();
        let opts = RayOptions {
            report_radii: grid.clone(),
            ..RayOptions::with_tol(1e-12)
        };
        let v = solve_ray_with(&eq, 0.0, 0.0, 0.96, &[Complex64::new(1.0, 0.0)], &opts).unwrap();
        let u = herold_majorant(&mp, 0.96, 1e-12, &grid).unwrap();
        let hyp = check_majorant_hypotheses(&mp, &eq, 0.0, &grid, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(hyp.ok, "{:?}", hyp.violations);
        let report = comparison_check(&v, &u, &mp, &hyp);
        assert!(report.pass);
        let p = report.points.iter().find(|p| p.r == 0.9 && p.order == Some(0)).unwrap();
        assert!((p.lhs - (2f64.sqrt() * 0.9).exp()).abs() < 1e-8, "{p:?}");
        assert!((p.rhs - 2.0 * 0.9f64.exp()).abs() < 1e-8 && (p.rhs - 4.9192).abs() < 1e-4);
    }

    #[test]
    fn perturbed_table_flips_hypotheses() {
        let (eq, mut mp, grid) = pair();
        let mut values = vec![1.0; grid.len()];
        mp.coefficients = vec![RealCoefficient::Tabulated {
            x: grid.clone(),
            values: values.clone(),
        }];
        let ok = check_majorant_hypotheses(&mp, &eq, 0.0, &grid, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(ok.ok);
        values[7] = 0.999;
        mp.coefficients = vec![RealCoefficient::Tabulated { x: grid.clone(), values }];
        let bad = check_majorant_hypotheses(&mp, &eq, 0.0, &grid, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(!bad.ok);
        mp.exceptional = vec![grid[7]];
        let excused = check_majorant_hypotheses(&mp, &eq, 0.0, &grid, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(excused.ok);
    }
}
