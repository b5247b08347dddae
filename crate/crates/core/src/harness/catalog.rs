//! Named equations with known initial data, closed-form solutions where
//! one exists, and the auxiliary data some checks need.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::analytic::AnalyticFn;
use crate::bounds::{MajorantProblem, RealCoefficient};
use crate::error::{Error, Result};
use crate::ray_solver::{branch_pow, EquationSpec};

/// `f, f', ..., f^(k)` at `z`.
pub type ClosedForm = fn(Complex64) -> Vec<Complex64>;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub equation: EquationSpec,
    /// Start radius of every ray.
    pub nu: f64,
    /// `f(z_theta), ..., f^(k-1)(z_theta)` when no closed form is given.
    pub init: Vec<Complex64>,
    pub closed_form: Option<ClosedForm>,
    /// Linear majorant for the comparison check.
    pub majorant: Option<MajorantProblem>,
    /// `M` in `|A_j(z)| <= (M/2) log((1+|z|)/(1-|z|))`.
    pub bloch_m: Option<f64>,
    pub note: &'static str,
}

impl CatalogEntry {
    /// Initial values at `nu e^{i theta}`.
    pub fn init_at(&self, theta: f64) -> Vec<Complex64> {
        match self.closed_form {
            Some(f) => {
                let mut v = f(Complex64::from_polar(self.nu, theta));
                v.truncate(self.equation.k);
                v
            }
            None => self.init.clone(),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cos_closed(z: Complex64) -> Vec<Complex64> {
    vec![z.cos(), -z.sin(), -z.cos()]
}

fn exp_closed(z: Complex64) -> Vec<Complex64> {
    vec![z.exp(), z.exp()]
}

fn rot_closed(z: Complex64) -> Vec<Complex64> {
    let w = c(0.0, FRAC_1_SQRT_2);
    let f = (w * z).exp();
    vec![f, w * f]
}

fn volterra_closed(z: Complex64) -> Vec<Complex64> {
    let g = c(1.0, 0.0) + c(0.0, 0.5) * z;
    vec![g * g, c(0.0, 1.0) * g]
}

fn herold_closed(z: Complex64) -> Vec<Complex64> {
    let f = (z * FRAC_1_SQRT_2).exp();
    vec![f, f * FRAC_1_SQRT_2]
}

fn eq(k: usize, exponents: Vec<f64>, coefficients: Vec<AnalyticFn>) -> EquationSpec {
    EquationSpec::new(k, exponents, coefficients).expect("catalog equations are well formed")
}

fn entry(name: &'static str, description: &'static str, equation: EquationSpec) -> CatalogEntry {
    CatalogEntry {
        name,
        description,
        equation,
        nu: 0.0,
        init: Vec::new(),
        closed_form: None,
        majorant: None,
        bloch_m: None,
        note: "",
    }
}

/// Every shipped entry, in listing order.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            closed_form: Some(cos_closed),
            note: "f = cos z",
            ..entry(
                "cos_linear",
                "f'' + f = 0, f(0) = 1, f'(0) = 0",
                eq(2, vec![1.0; 3], vec![AnalyticFn::constant(1.0, 0.0), AnalyticFn::zero()]),
            )
        },
        CatalogEntry {
            closed_form: Some(exp_closed),
            note: "f = e^z on the principal sheet",
            ..entry(
                "exp_nonlinear",
                "(f')^2 - f^2 = 0, f(0) = 1",
                eq(1, vec![2.0; 2], vec![AnalyticFn::constant(-1.0, 0.0)]),
            )
        },
        CatalogEntry {
            closed_form: Some(rot_closed),
            note: "f = exp(i z / sqrt 2); |f| = 1 only on the real axis",
            ..entry(
                "rot_nonlinear",
                "(f')^2 + f^2/2 = 0, f(0) = 1",
                eq(1, vec![2.0; 2], vec![AnalyticFn::constant(0.5, 0.0)]),
            )
        },
        CatalogEntry {
            closed_form: Some(volterra_closed),
            note: "f = (1 + i z/2)^2",
            ..entry(
                "volterra_k1",
                "(f')^2 + f = 0, f(0) = 1",
                eq(1, vec![1.0, 2.0], vec![AnalyticFn::constant(1.0, 0.0)]),
            )
        },
        CatalogEntry {
            closed_form: Some(herold_closed),
            majorant: Some(MajorantProblem {
                k: 1,
                n0: 2.0,
                a: 0.0,
                coefficients: vec![RealCoefficient::constant(1.0)],
                exceptional: Vec::new(),
                init: vec![1.0],
            }),
            note: "v = exp(z / sqrt 2), |v|^2 = e^{sqrt 2 x}; majorant u' = u, u = e^x",
            ..entry(
                "herold_pair",
                "(v')^2 - v^2/2 = 0, v(0) = 1, with linear majorant u' = u, u(0) = 1",
                eq(1, vec![2.0; 2], vec![AnalyticFn::constant(-0.5, 0.0)]),
            )
        },
        CatalogEntry {
            nu: 0.1,
            init: vec![c(1.0, 0.0)],
            bloch_m: Some(2.0),
            note: "A_0 = log(1/(1-z)) has Bloch norm 2; rays start at 0.1 where A_0 != 0",
            ..entry(
                "bloch_coeff",
                "(f')^2 + log(1/(1-z)) f^2 = 0, f(0.1 e^{i theta}) = 1",
                eq(1, vec![2.0; 2], vec![AnalyticFn::log_pole(1.0)]),
            )
        },
        CatalogEntry {
            init: vec![c(1.0, 0.0), c(0.1, 0.0)],
            note: "no closed form",
            ..entry(
                "small_norm_qk",
                "(f'')^2 + 1e-3 (f')^2 + 1e-3 f^2 = 0, f(0) = 1, f'(0) = 0.1",
                eq(2, vec![2.0; 3], vec![AnalyticFn::constant(1e-3, 0.0), AnalyticFn::constant(1e-3, 0.0)]),
            )
        },
    ]
}

pub fn names() -> Vec<&'static str> {
    catalog().iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name).ok_or_else(|| {
        Error::invalid(format!("unknown catalog entry '{name}'; known: {}", names().join(", ")))
    })
}

/// Largest `|(f^(k))^{n_k} + sum A_j (f^(j))^{n_j}|` of the closed form on
/// 8 rays at radii 0.1, ..., 0.9.
pub fn closed_form_residual(e: &CatalogEntry) -> Option<f64> {
    let f = e.closed_form?;
    let eq = &e.equation;
    let mut worst = 0.0f64;
    for m in 0..8 {
        for i in 1..=9 {
            let z = Complex64::from_polar(0.1 * i as f64, 2.0 * PI * m as f64 / 8.0);
            let d = f(z);
            let mut sum = branch_pow(d[eq.k], eq.n_k());
            for j in 0..eq.k {
                sum += eq.coefficients[j].eval_unchecked(z) * branch_pow(d[j], eq.exponents[j]);
            }
            worst = worst.max(sum.norm());
        }
    }
    Some(worst)
}

/// Residual of every closed form, failing if any exceeds `1e-9`.
pub fn validate_catalog() -> Result<Vec<(&'static str, f64)>> {
    let mut out = Vec::new();
    for e in catalog() {
        if let Some(res) = closed_form_residual(&e) {
            if !(res <= 1e-9) {
                return Err(Error::precondition(format!("catalog entry {} has closed-form residual {res:e}", e.name)));
            }
            out.push((e.name, res));
        }
    }
    Ok(out)
}
