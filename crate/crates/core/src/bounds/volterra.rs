//! Iterated-kernel estimate for `n_k >= n_j`, `n_k >= 1`, along the
//! segment from the origin:
//! `|f^(k)|^{n_k} <= H(r) + int_0^r L(r,s) |f^(k)(s e^{i theta})|^{n_k} ds`,
//! resolved by the Neumann series `sum_i H_i`.
//!
//! `H_i` for `i >= 1` are stored at Chebyshev–Lobatto nodes on `[0, R]` and
//! evaluated by barycentric interpolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoundPoint, BoundReport, BoundStatus};
use crate::error::{Error, Result};
use crate::quadrature::{compensated_sum, integrate_adaptive};
use crate::ray_solver::{solve_ray_with, EquationSpec, RayOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraKernels {
    pub h: f64,
    pub l: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

struct Kernel<'a> {
    eq: &'a EquationSpec,
    theta: f64,
    /// `|f^(j)(0)|`, `j < k`
    init: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(eq: &'a EquationSpec, theta: f64, init: &[Complex64]) -> Result<Self> {
        eq.validate_shape()?;
        if init.len() != eq.k {
            return Err(Error::invalid(format!("expected {} initial values, got {}", eq.k, init.len())));
        }
        let n_k = eq.n_k();
        if n_k < 1.0 || eq.exponents.iter().any(|&n| n > n_k) {
            return Err(Error::hypothesis(format!(
                "iterated-kernel estimate needs n_k >= n_j and n_k >= 1, got {:?}",
                eq.exponents
            )));
        }
        Ok(Kernel {
            eq,
            theta,
            init: init.iter().map(|c| c.norm()).collect(),
        })
    }

    fn a_abs(&self, idx: usize, r: f64) -> f64 {
        let a = &self.eq.coefficients[idx];
        if a.is_identically_zero() {
            0.0
        } else {
            a.eval_unchecked(Complex64::from_polar(r, self.theta)).norm()
        }
    }

    fn h(&self, r: f64) -> f64 {
        let k = self.eq.k;
        let n_k = self.eq.n_k();
        let mut terms = Vec::with_capacity(2 * k);
        for j in 1..=k {
            let n = self.eq.exponents[k - j];
            let scaled = n.powi(j as i32) * self.a_abs(k - j, r);
            let data: f64 = (1..=j)
                .map(|m| self.init[k - m].powf(n) * (r.powi((j - m) as i32) / factorial(j - m)).powf(n))
                .sum();
            terms.push(scaled * data);
            if n < n_k {
                terms.push((n_k - n) / n_k * scaled.powf(n_k / (n_k - n)));
            }
        }
        compensated_sum(terms)
    }

    fn l(&self, r: f64, s: f64) -> f64 {
        let k = self.eq.k;
        let n_k = self.eq.n_k();
        let common = r.powf(n_k - 1.0);
        let terms = (1..=k).map(|j| {
            let n = self.eq.exponents[k - j];
            // equal exponents carry the product itself instead of splitting it
            let coef = if n < n_k {
                n / n_k
            } else {
                n.powi(j as i32) * self.a_abs(k - j, r)
            };
            coef * (r - s).max(0.0).powf(n_k * (j - 1) as f64) * common / factorial(j - 1).powf(n_k)
        });
        compensated_sum(terms)
    }
}

/// `H(r)` and `L(r, s)` for the ray at angle `theta` with initial data
/// `f^(j)(0)`, `j < k`.
pub fn volterra_kernels(eq: &EquationSpec, theta: f64, init: &[Complex64], r: f64, s: f64) -> Result<VolterraKernels> {
    if !(0.0 <= s && s <= r && r < 1.0) {
        return Err(Error::domain(format!("need 0 <= s <= r < 1, got s={s}, r={r}")));
    }
    let kern = Kernel::new(eq, theta, init)?;
    Ok(VolterraKernels {
        h: kern.h(r),
        l: kern.l(r, s),
    })
}

/// `T^{n+1} M / n!`
pub fn tail_bound(t: f64, m: f64, n: usize) -> f64 {
    // evaluated as a product to avoid overflow of the factorial
    let mut v = m * t;
    for i in 1..=n {
        v *= t / i as f64;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraOptions {
    pub tol: f64,
    pub n_max: usize,
    pub chebyshev_nodes: usize,
    pub oversample: usize,
    pub ray_tol: f64,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        VolterraOptions {
            tol: 1e-12,
            n_max: 60,
            chebyshev_nodes: 64,
            oversample: 4,
            ray_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraBound {
    pub theta: f64,
    pub r: Vec<f64>,
    /// `H_i` at every grid radius, one row per `i`.
    pub terms: Vec<Vec<f64>>,
    pub partial_sums: Vec<f64>,
    pub tail: Vec<f64>,
    pub t_values: Vec<f64>,
    pub s_values: Vec<f64>,
    pub m_values: Vec<f64>,
    /// Bound for `|f(r e^{i theta})|`.
    pub f_bound: Vec<f64>,
    pub converged: bool,
    pub chebyshev_nodes: Vec<f64>,
    /// `H_i` at the Chebyshev nodes, one row per `i`.
    pub chebyshev_values: Vec<Vec<f64>>,
    /// `|f^(k)|^{n_k} <= sum H_i + tail`
    pub top_report: BoundReport,
    /// `|f| <=` the integrated bound
    pub f_report: BoundReport,
}

fn chebyshev_lobatto(n: usize, len: f64) -> Vec<f64> {
    (0..=n).map(|p| 0.5 * len * (1.0 - (PI * p as f64 / n as f64).cos())).collect()
}

fn barycentric(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, (&xp, &vp)) in nodes.iter().zip(values).enumerate() {
        let d = x - xp;
        if d == 0.0 {
            return vp;
        }
        let mut w = if p % 2 == 0 { 1.0 } else { -1.0 };
        if p == 0 || p == n {
            w *= 0.5;
        }
        num += w * vp / d;
        den += w / d;
    }
    num / den
}

impl VolterraBound {
    /// `H_i(r)` from the stored Chebyshev data, clamped at zero.
    pub fn term_at(&self, i: usize, r: f64) -> f64 {
        barycentric(&self.chebyshev_nodes, &self.chebyshev_values[i], r).max(0.0)
    }
}

fn running_max(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    values
        .into_iter()
        .map(|v| {
            best = best.max(v);
            best
        })
        .collect()
}

/// Build `H_0, H_1, ...` until the remainder bound `T^{n+1} M / n!` drops
/// below `opts.tol` on the whole grid, then check the estimate for
/// `|f^(k)|^{n_k}` and the integrated estimate for `|f|` against a ray
/// solve from the origin.
pub fn volterra_series_bound(
    eq: &EquationSpec,
    theta: f64,
    init: &[Complex64],
    r_grid: &[f64],
    opts: &VolterraOptions,
) -> Result<VolterraBound> {
    let kern = Kernel::new(eq, theta, init)?;
    if r_grid.is_empty() || r_grid[0] < 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("radial grid must be nonempty, nonnegative and strictly increasing"));
    }
    let big_r = *r_grid.last().unwrap();
    if !(big_r > 0.0 && big_r < 1.0) {
        return Err(Error::domain(format!("largest grid radius {big_r} must lie in (0, 1)")));
    }
    let k = eq.k;
    let n_k = eq.n_k();

    // dense radii for T, S, M
    let dense_n = opts.oversample.max(1) * r_grid.len().max(8);
    let mut dense: Vec<f64> = (0..=dense_n).map(|i| big_r * i as f64 / dense_n as f64).collect();
    dense.extend_from_slice(r_grid);
    dense.sort_by(f64::total_cmp);
    dense.dedup();

    let ray_opts = RayOptions {
        report_radii: dense.iter().copied().filter(|&r| r > 0.0).collect(),
        ..RayOptions::with_tol(opts.ray_tol)
    };
    let ray = solve_ray_with(eq, theta, 0.0, big_r, init, &ray_opts)?;

    let h_dense: Vec<f64> = dense.iter().map(|&r| kern.h(r)).collect();
    let s_dense = running_max(h_dense.iter().copied());
    let t_dense = running_max(dense.iter().enumerate().map(|(i, &r1)| {
        dense[..=i].iter().map(|&r2| kern.l(r1, r2)).fold(0.0, f64::max)
    }));
    let m_dense = running_max(dense.iter().map(|&r| {
        ray.sample_at(r).map_or(f64::INFINITY, |s| s.derivs[k].norm().powf(n_k))
    }));
    let at_grid = |values: &[f64]| -> Vec<f64> {
        r_grid
            .iter()
            .map(|r| values[dense.binary_search_by(|x| x.total_cmp(r)).unwrap()])
            .collect()
    };
    let (t_values, s_values, m_values) = (at_grid(&t_dense), at_grid(&s_dense), at_grid(&m_dense));

    let nodes = chebyshev_lobatto(opts.chebyshev_nodes.max(4), big_r);
    let mut cheb_values = vec![nodes.iter().map(|&x| kern.h(x)).collect::<Vec<f64>>()];
    let mut terms = vec![r_grid.iter().map(|&r| kern.h(r)).collect::<Vec<f64>>()];
    let tails_at = |n: usize| -> Vec<f64> {
        t_values
            .iter()
            .zip(&m_values)
            .map(|(&t, &m)| tail_bound(t, m, n))
            .collect()
    };
    let mut tail = tails_at(0);
    let mut converged = tail.iter().all(|&t| t < opts.tol);
    let mut n = 0;
    while !converged && n < opts.n_max {
        let prev = cheb_values.last().unwrap().clone();
        let h_prev = |s: f64| {
            if n == 0 {
                kern.h(s)
            } else {
                barycentric(&nodes, &prev, s).max(0.0)
            }
        };
        let next = |r: f64| integrate_adaptive(|s| kern.l(r, s) * h_prev(s), 0.0, r, 1e-16, 1e-12).value;
        cheb_values.push(nodes.iter().map(|&x| next(x)).collect());
        terms.push(r_grid.iter().map(|&r| next(r)).collect());
        n += 1;
        tail = tails_at(n);
        converged = tail.iter().all(|&t| t < opts.tol);
    }

    let partial_sums: Vec<f64> = (0..r_grid.len())
        .map(|p| compensated_sum(terms.iter().map(|row| row[p])))
        .collect();

    let sum_at = |s: f64| -> f64 {
        let rest = cheb_values[1..]
            .iter()
            .map(|vals| barycentric(&nodes, vals, s).max(0.0));
        kern.h(s) + compensated_sum(rest)
    };
    let taylor = |r: f64| -> f64 {
        (1..=k)
            .map(|m| kern.init[k - m] * r.powi((k - m) as i32) / factorial(k - m))
            .sum()
    };
    let f_bound: Vec<f64> = r_grid
        .iter()
        .zip(&tail)
        .map(|(&r, &tl)| {
            let integral = integrate_adaptive(
                |s| (r - s).powi(k as i32 - 1) / factorial(k - 1) * (sum_at(s) + tl).powf(1.0 / n_k),
                0.0,
                r,
                1e-15,
                1e-12,
            )
            .value;
            taylor(r) + integral
        })
        .collect();

    let mut top_points = Vec::new();
    let mut f_points = Vec::new();
    for (p, &r) in r_grid.iter().enumerate() {
        let Some(s) = ray.sample_at(r).or_else(|| (r == 0.0).then(|| &ray.samples[0])) else {
            continue;
        };
        top_points.push(BoundPoint::new(r, Some(k), s.derivs[k].norm().powf(n_k), partial_sums[p] + tail[p]));
        f_points.push(BoundPoint::new(r, Some(0), s.derivs[0].norm(), f_bound[p]));
    }
    let mut top_report = BoundReport::from_points("volterra_top", theta, top_points)
        .note(format!("{} iterated terms", terms.len()));
    let mut f_report = BoundReport::from_points("volterra_f", theta, f_points);
    for report in [&mut top_report, &mut f_report] {
        if let Some(t) = &ray.truncated {
            report.truncated_at = Some(t.last_good_r);
            report.withhold(BoundStatus::HypothesesUnmet, format!("ray truncated: {}", t.reason));
        }
        if !converged {
            report.withhold(BoundStatus::NotConverged, "series not converged");
        }
    }

    Ok(VolterraBound {
        theta,
        r: r_grid.to_vec(),
        terms,
        partial_sums,
        tail,
        t_values,
        s_values,
        m_values,
        f_bound,
        converged,
        chebyshev_nodes: nodes,
        chebyshev_values: cheb_values,
        top_report,
        f_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticFn;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn k1() -> EquationSpec {
        EquationSpec::new(1, vec![1.0, 2.0], vec![AnalyticFn::constant(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn kernel_examples() {
        for r in [0.0, 0.3, 0.9] {
            let v = volterra_kernels(&k1(), 0.0, &[c(1.0)], r, 0.5 * r).unwrap();
            assert!((v.h - 1.5).abs() < 1e-15);
            assert!((v.l - r / 2.0).abs() < 1e-15);
        }
        let zero = EquationSpec {
            k: 1,
            exponents: vec![1.0, 2.0],
            coefficients: vec![AnalyticFn::zero()],
        };
        let v = volterra_kernels(&zero, 0.0, &[c(0.0)], 0.5, 0.2).unwrap();
        assert_eq!(v.h, 0.0);
        assert_eq!(v.l, 0.25);
    }

    #[test]
    fn equal_exponent_kernel() {
        // A_0 = 1/2: the product coefficient n |A_0| equals 1
        let eq = EquationSpec::uniform(1, 2.0, vec![AnalyticFn::constant(0.5, 0.0)]).unwrap();
        let v = volterra_kernels(&eq, 0.0, &[c(3.0)], 0.6, 0.1).unwrap();
        assert!((v.h - 2.0 * 0.5 * 9.0).abs() < 1e-14);
        assert!((v.l - 0.6).abs() < 1e-15);
    }

    #[test]
    fn exponent_pattern_enforced() {
        let eq = EquationSpec::new(1, vec![3.0, 2.0], vec![AnalyticFn::constant(1.0, 0.0)]).unwrap();
        assert!(matches!(volterra_kernels(&eq, 0.0, &[c(1.0)], 0.5, 0.1), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn closed_form_iterates() {
        let grid: Vec<f64> = (1..=18).map(|i| i as f64 * 0.05).collect();
        let b = volterra_series_bound(&k1(), 0.0, &[c(1.0)], &grid, &VolterraOptions::default()).unwrap();
        assert!(b.converged);
        let p = grid.iter().position(|&r| r == 0.5).unwrap();
        assert!((b.terms[0][p] - 1.5).abs() < 1e-14);
        assert!((b.terms[1][p] - 0.75 * 0.25).abs() < 1e-12);
        assert!((b.terms[2][p] - 0.0625 / 8.0).abs() < 1e-12);
        let three = b.terms[0][p] + b.terms[1][p] + b.terms[2][p];
        assert!((three - 1.6953125).abs() < 1e-8);
        assert!(b.top_report.pass && b.f_report.pass);
    }

    #[test]
    fn k1_shortcut_matches_quadrature() {
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.1).collect();
        let b = volterra_series_bound(&k1(), 0.0, &[c(1.0)], &grid, &VolterraOptions::default()).unwrap();
        for i in 0..b.terms.len() - 1 {
            for (p, &r) in grid.iter().enumerate() {
                let integral = integrate_adaptive(|s| b.term_at(i, s), 0.0, r, 1e-16, 1e-13).value;
                assert!((0.5 * r * integral - b.terms[i + 1][p]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn partial_sums_and_tail_shape() {
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.1).collect();
        let eq = EquationSpec::new(2, vec![1.0, 1.5, 2.0], vec![AnalyticFn::constant(0.5, 0.5), AnalyticFn::constant(-0.3, 0.0)]).unwrap();
        let b = volterra_series_bound(&eq, 0.4, &[c(1.0), c(0.5)], &grid, &VolterraOptions::default()).unwrap();
        assert!(b.terms.iter().flatten().all(|&h| h >= 0.0));
        for p in 0..grid.len() {
            let mut acc = 0.0;
            for row in &b.terms {
                let next = acc + row[p];
                assert!(next >= acc);
                acc = next;
            }
            let (t, m) = (b.t_values[p], b.m_values[p]);
            let start = t.ceil() as usize;
            for n in start..start + 20 {
                assert!(tail_bound(t, m, n + 1) <= tail_bound(t, m, n));
            }
        }
    }

    #[test]
    fn zero_equation_reduces_to_taylor() {
        let eq = EquationSpec {
            k: 2,
            exponents: vec![1.0, 1.0, 1.0],
            coefficients: vec![AnalyticFn::zero(), AnalyticFn::zero()],
        };
        let grid = [0.2, 0.5, 0.8];
        let b = volterra_series_bound(&eq, 0.0, &[c(1.0), c(2.0)], &grid, &VolterraOptions::default()).unwrap();
        assert!(b.partial_sums.iter().all(|&s| s == 0.0));
        for (r, v) in grid.iter().zip(&b.f_bound) {
            assert!((v - (1.0 + 2.0 * r)).abs() < 1e-14);
        }
        assert!(b.f_report.pass);
    }
}
