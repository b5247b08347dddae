//! Explicit growth estimates for solutions, evaluated along rays and
//! checked against ray solutions.
//!
//! Every check produces a [`BoundReport`]: a list of `(r, lhs, rhs)`
//! points with `lhs` from the solution and `rhs` the estimate.

mod growth;
mod majorant;
mod volterra;

use serde::{Deserialize, Serialize};

use crate::quadrature::{compensated_sum, integrate_adaptive};

pub use growth::{
    bloch_growth_bound, bloch_inner_integral, derivative_growth_bound, growth_bound, growth_constant, h_theta,
    hinf_exponential_factor, hinf_growth_bound, BlochGrowthReport, C0,
};
pub use majorant::{
    check_majorant_hypotheses, comparison_check, herold_majorant, HypothesisVerdict, MajorantProblem,
    MajorantTrajectory, RealCoefficient,
};
pub use volterra::{
    tail_bound, volterra_kernels, volterra_series_bound, VolterraBound, VolterraKernels, VolterraOptions,
};

/// Relative slack in the pass test.
pub const REL_SLACK: f64 = 1e-6;
/// Absolute slack in the pass test.
pub const ABS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    Fail,
    /// The estimate's hypotheses do not hold; no claim either way.
    HypothesesUnmet,
    /// An iterated series did not reach its tolerance; no claim.
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub r: f64,
    /// Derivative order for multi-order checks.
    pub order: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs (1 + REL_SLACK) + ABS_SLACK - lhs`
    pub margin: f64,
    pub pass: bool,
}

impl BoundPoint {
    pub fn new(r: f64, order: Option<usize>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs * (1.0 + REL_SLACK) + ABS_SLACK - lhs;
        BoundPoint {
            r,
            order,
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub theta: f64,
    pub points: Vec<BoundPoint>,
    /// Smallest margin over the grid.
    pub margin: f64,
    pub status: BoundStatus,
    pub pass: bool,
    /// Radius where the underlying ray stopped early, if it did.
    pub truncated_at: Option<f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn from_points(bound_id: impl Into<String>, theta: f64, points: Vec<BoundPoint>) -> Self {
        let margin = points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
        let pass = points.iter().all(|p| p.pass);
        BoundReport {
            bound_id: bound_id.into(),
            theta,
            points,
            margin,
            status: if pass { BoundStatus::Pass } else { BoundStatus::Fail },
            pass,
            truncated_at: None,
            notes: Vec::new(),
        }
    }

    /// Withdraw the pass/fail claim.
    pub fn withhold(&mut self, status: BoundStatus, note: impl Into<String>) {
        self.status = status;
        self.pass = false;
        self.notes.push(note.into());
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// `int_{x_0}^{x_i} g` at every point of the increasing sequence `xs`.
pub(crate) fn cumulative_integral(mut g: impl FnMut(f64) -> f64, xs: &[f64]) -> Vec<f64> {
    let mut pieces = Vec::with_capacity(xs.len());
    let mut out = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            pieces.push(integrate_adaptive(&mut g, xs[i - 1], x, 1e-14, 1e-13).value);
        }
        out.push(compensated_sum(pieces.iter().copied()));
    }
    out
}

/// Maximum of `g` on `[a, b]`: dense sampling, then golden-section
/// refinement around the best sample.
pub(crate) fn sup_on_interval(g: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    if b <= a {
        return g(a);
    }
    let n = samples.max(2);
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let v = g(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = (xs[best_i.saturating_sub(1)], xs[(best_i + 1).min(n)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    best.max(f1).max(f2).max(g(b)).max(g(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pass_rule_uses_slack() {
        let p = BoundPoint::new(0.5, None, 1.0 + 5e-7, 1.0);
        assert!(p.pass);
        let q = BoundPoint::new(0.5, None, 1.0 + 2e-6, 1.0);
        assert!(!q.pass);
        let r = BoundReport::from_points("x", 0.0, vec![p, q]);
        assert!(!r.pass);
        assert_eq!(r.status, BoundStatus::Fail);
    }

    #[test]
    fn cumulative_integral_of_constant() {
        let v = cumulative_integral(|_| 2.0, &[0.1, 0.3, 0.6]);
        assert_eq!(v[0], 0.0);
        assert!((v[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interval_sup_finds_interior_peak() {
        let v = sup_on_interval(|x| -(x - 0.3337).powi(2), 0.0, 1.0, 16);
        assert!(v > -1e-20);
    }
}
