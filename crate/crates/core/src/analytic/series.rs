use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated Taylor expansion `sum c_n z^n`, trusted for `|z| <= declared_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coefficients: Vec<Complex64>,
    #[serde(default = "PowerSeries::default_radius")]
    declared_radius: f64,
}

impl PowerSeries {
    pub const DEFAULT_DEGREE: usize = 64;
    pub const DEFAULT_RADIUS: f64 = 1.0 - 1e-6;

    fn default_radius() -> f64 {
        Self::DEFAULT_RADIUS
    }

    /// An empty coefficient list is promoted to the zero series of degree 0.
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        let coefficients = if coefficients.is_empty() {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            coefficients
        };
        PowerSeries {
            coefficients,
            declared_radius: Self::DEFAULT_RADIUS,
        }
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn from_fn(degree: usize, f: impl Fn(usize) -> Complex64) -> Self {
        Self::new((0..=degree).map(f).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c z^n`
    pub fn monomial(n: usize, c: Complex64) -> Self {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); n + 1];
        coefficients[n] = c;
        Self::new(coefficients)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::domain(format!(
                "declared radius {radius} outside (0, 1]"
            )));
        }
        self.declared_radius = radius;
        Ok(self)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn truncation_degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn declared_radius(&self) -> f64 {
        self.declared_radius
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Horner evaluation. Fails outside the declared radius.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > self.declared_radius {
            return Err(Error::domain(format!(
                "|z| = {} exceeds declared radius {}",
                z.norm(),
                self.declared_radius
            )));
        }
        Ok(self.eval_unchecked(z))
    }

    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// The `order`-th formal derivative. Orders beyond the truncation degree
    /// give the zero series of degree 0.
    pub fn derivative(&self, order: usize) -> PowerSeries {
        if order == 0 {
            return self.clone();
        }
        if order > self.truncation_degree() {
            return PowerSeries {
                coefficients: vec![Complex64::new(0.0, 0.0)],
                declared_radius: self.declared_radius,
            };
        }
        let coefficients = self.coefficients[order..]
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                // d^order/dz^order z^(m+order) = (m+order)!/m! z^m
                let falling: f64 = ((m + 1)..=(m + order)).map(|v| v as f64).product();
                c * falling
            })
            .collect();
        PowerSeries {
            coefficients,
            declared_radius: self.declared_radius,
        }
    }

    pub fn scale(&self, lambda: Complex64) -> PowerSeries {
        PowerSeries {
            coefficients: self.coefficients.iter().map(|&c| c * lambda).collect(),
            declared_radius: self.declared_radius,
        }
    }

    /// Sum of two series; the result is trusted on the smaller of the two radii.
    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.coefficients.len().max(other.coefficients.len());
        let zero = Complex64::new(0.0, 0.0);
        let coefficients = (0..n)
            .map(|i| {
                self.coefficients.get(i).copied().unwrap_or(zero)
                    + other.coefficients.get(i).copied().unwrap_or(zero)
            })
            .collect();
        PowerSeries {
            coefficients,
            declared_radius: self.declared_radius.min(other.declared_radius),
        }
    }
}
