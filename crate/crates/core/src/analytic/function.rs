use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::PowerSeries;
use crate::error::{Error, Result};

/// An analytic function on the unit disk.
///
/// Closed forms are evaluated directly together with all derivatives;
/// they are exact up to rounding anywhere in the open disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticFn {
    Series { series: PowerSeries },
    Constant { value: Complex64 },
    /// `scale * log(1/(1-z))`
    LogPole { scale: Complex64 },
    /// `scale / (1-z)^order`
    Pole { scale: Complex64, order: u32 },
}

impl AnalyticFn {
    pub fn constant(re: f64, im: f64) -> Self {
        AnalyticFn::Constant {
            value: Complex64::new(re, im),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0, 0.0)
    }

    pub fn series(series: PowerSeries) -> Self {
        AnalyticFn::Series { series }
    }

    pub fn log_pole(scale: f64) -> Self {
        AnalyticFn::LogPole {
            scale: Complex64::new(scale, 0.0),
        }
    }

    pub fn simple_pole(scale: f64) -> Self {
        AnalyticFn::Pole {
            scale: Complex64::new(scale, 0.0),
            order: 1,
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        let zero = |c: &Complex64| c.re == 0.0 && c.im == 0.0;
        match self {
            AnalyticFn::Series { series } => series.is_zero(),
            AnalyticFn::Constant { value } => zero(value),
            AnalyticFn::LogPole { scale } | AnalyticFn::Pole { scale, .. } => zero(scale),
        }
    }

    /// Radius inside which evaluation is trusted.
    pub fn trusted_radius(&self) -> f64 {
        match self {
            AnalyticFn::Series { series } => series.declared_radius(),
            _ => 1.0,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.derivative_eval(z, 0)
    }

    /// Value of the `order`-th derivative at `z`.
    pub fn derivative_eval(&self, z: Complex64, order: usize) -> Result<Complex64> {
        match self {
            AnalyticFn::Series { series } => {
                if order == 0 {
                    series.eval(z)
                } else {
                    series.derivative(order).eval(z)
                }
            }
            _ => {
                if z.norm() >= 1.0 {
                    return Err(Error::domain(format!("|z| = {} not in the open disk", z.norm())));
                }
                Ok(self.closed_form_derivative(z, order))
            }
        }
    }

    /// Evaluation without the domain check, for hot loops over points that
    /// are already known to lie in the trusted disk.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFn::Series { series } => series.eval_unchecked(z),
            _ => self.closed_form_derivative(z, 0),
        }
    }

    fn closed_form_derivative(&self, z: Complex64, order: usize) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            AnalyticFn::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            AnalyticFn::LogPole { scale } => {
                if order == 0 {
                    -*scale * (one - z).ln()
                } else {
                    // (m-1)! / (1-z)^m
                    let fact: f64 = (1..order).map(|v| v as f64).product();
                    *scale * fact / (one - z).powi(order as i32)
                }
            }
            AnalyticFn::Pole { scale, order: p } => {
                // p (p+1) ... (p+m-1) / (1-z)^(p+m)
                let rising: f64 = (0..order).map(|i| (*p as usize + i) as f64).product();
                *scale * rising / (one - z).powi((*p as usize + order) as i32)
            }
            AnalyticFn::Series { .. } => unreachable!("series handled by caller"),
        }
    }

    /// Derivative as another analytic function, when representable.
    pub fn derivative(&self, order: usize) -> AnalyticFn {
        if order == 0 {
            return self.clone();
        }
        match self {
            AnalyticFn::Series { series } => AnalyticFn::series(series.derivative(order)),
            AnalyticFn::Constant { .. } => AnalyticFn::zero(),
            // d/dz log(1/(1-z)) = 1/(1-z)
            AnalyticFn::LogPole { scale } => AnalyticFn::Pole {
                scale: *scale,
                order: 1,
            }
            .derivative(order - 1),
            AnalyticFn::Pole { scale, order: p } => {
                let rising: f64 = (0..order).map(|i| (*p as usize + i) as f64).product();
                AnalyticFn::Pole {
                    scale: *scale * rising,
                    order: *p + order as u32,
                }
            }
        }
    }

    /// Taylor coefficients up to `degree`.
    pub fn taylor(&self, degree: usize) -> PowerSeries {
        match self {
            AnalyticFn::Series { series } => {
                let mut c = series.coefficients().to_vec();
                c.resize(degree + 1, Complex64::new(0.0, 0.0));
                PowerSeries::new(c)
            }
            AnalyticFn::Constant { value } => {
                PowerSeries::from_fn(degree, |n| if n == 0 { *value } else { Complex64::new(0.0, 0.0) })
            }
            AnalyticFn::LogPole { scale } => PowerSeries::from_fn(degree, |n| {
                if n == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    *scale / n as f64
                }
            }),
            AnalyticFn::Pole { scale, order: p } => PowerSeries::from_fn(degree, |n| {
                // binomial(n + p - 1, n)
                let c: f64 = (1..=n).map(|i| (i + *p as usize - 1) as f64 / i as f64).product();
                *scale * c
            }),
        }
    }
}
