//! Radial integration of
//! `(f^(k))^{n_k} + sum_{j<k} A_j(z) (f^(j))^{n_j} = 0`
//! along `z = r e^{i theta}`, with the `1/n_k`-th root continued along
//! the ray.
//!
//! Every power `(f^(j))^{n_j}` and the radicand
//! `w = -sum A_j (f^(j))^{n_j}` carry their own unwrapped argument,
//! started from principal values at `z_theta = nu e^{i theta}`. A step
//! that moves any of them by more than `pi/2` is rejected.

mod branch;
mod dp5;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticFn;
use crate::error::{Error, Result};
pub use branch::branch_pow;
use branch::{continue_phase, principal_arg, tracked_pow};
pub use dp5::hermite;
pub(crate) use dp5::{integrate, OdeSystem, StepControl};

/// The nonlinear equation of order `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub k: usize,
    /// `n_0, ..., n_k`
    pub exponents: Vec<f64>,
    /// `A_0, ..., A_{k-1}`
    pub coefficients: Vec<AnalyticFn>,
}

impl EquationSpec {
    pub fn new(k: usize, exponents: Vec<f64>, coefficients: Vec<AnalyticFn>) -> Result<Self> {
        let eq = EquationSpec {
            k,
            exponents,
            coefficients,
        };
        eq.validate()?;
        Ok(eq)
    }

    /// All exponents equal to `n`.
    pub fn uniform(k: usize, n: f64, coefficients: Vec<AnalyticFn>) -> Result<Self> {
        Self::new(k, vec![n; k + 1], coefficients)
    }

    pub fn linear(k: usize, coefficients: Vec<AnalyticFn>) -> Result<Self> {
        Self::uniform(k, 1.0, coefficients)
    }

    /// Full check: shape plus at least one nonzero coefficient.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if self.n_c() == 0 {
            return Err(Error::invalid("at least one coefficient must be nonzero"));
        }
        Ok(())
    }

    /// Orders, lengths and exponents only; the zero equation passes.
    pub fn validate_shape(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("equation order k must be >= 1"));
        }
        if self.exponents.len() != self.k + 1 {
            return Err(Error::invalid(format!(
                "expected {} exponents n_0..n_k, got {}",
                self.k + 1,
                self.exponents.len()
            )));
        }
        if self.coefficients.len() != self.k {
            return Err(Error::invalid(format!(
                "expected {} coefficients A_0..A_(k-1), got {}",
                self.k,
                self.coefficients.len()
            )));
        }
        if let Some(n) = self.exponents.iter().find(|n| !(n.is_finite() && **n > 0.0)) {
            return Err(Error::invalid(format!("exponent {n} is not a positive real")));
        }
        Ok(())
    }

    /// Number of coefficients that are not identically zero.
    pub fn n_c(&self) -> usize {
        self.coefficients.iter().filter(|a| !a.is_identically_zero()).count()
    }

    pub fn n_k(&self) -> f64 {
        self.exponents[self.k]
    }

    pub fn is_linear(&self) -> bool {
        self.exponents.iter().all(|&n| n == 1.0)
    }

    /// Smallest radius at which some coefficient stops being trusted.
    pub fn trusted_radius(&self) -> f64 {
        self.coefficients.iter().map(|a| a.trusted_radius()).fold(1.0, f64::min)
    }
}

/// The extracted `f^(k)` with its radicand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopDerivative {
    pub value: Complex64,
    pub radicand: Complex64,
    /// Argument of the radicand used for the root.
    pub radicand_phase: f64,
    pub branch_reset: bool,
}

/// Branch state carried along a ray.
#[derive(Debug, Clone, PartialEq)]
struct Phases {
    lower: Vec<Option<f64>>,
    radicand: Option<f64>,
}

impl Phases {
    fn fresh(k: usize) -> Self {
        Phases {
            lower: vec![None; k],
            radicand: None,
        }
    }
}

fn top_with_phases(
    eq: &EquationSpec,
    z: Complex64,
    lower: &[Complex64],
    phases: &Phases,
) -> Result<(TopDerivative, Phases)> {
    let mut next = Phases::fresh(eq.k);
    let mut w = Complex64::new(0.0, 0.0);
    for j in 0..eq.k {
        let phase = continue_phase(phases.lower[j], lower[j]);
        next.lower[j] = phase;
        let phase = phase.unwrap_or(0.0);
        let a = &eq.coefficients[j];
        if a.is_identically_zero() {
            continue;
        }
        w -= a.eval_unchecked(z) * tracked_pow(lower[j], eq.exponents[j], phase);
    }
    let n_k = eq.n_k();
    if w.re == 0.0 && w.im == 0.0 {
        if n_k < 1.0 {
            return Err(Error::SingularPower(1.0 / n_k));
        }
        let phase = phases.radicand.unwrap_or(0.0);
        next.radicand = None;
        let top = TopDerivative {
            value: Complex64::new(0.0, 0.0),
            radicand: w,
            radicand_phase: phase,
            branch_reset: true,
        };
        return Ok((top, next));
    }
    next.radicand = continue_phase(phases.radicand, w);
    let phase = next.radicand.unwrap_or(0.0);
    let value = if n_k == 1.0 {
        w
    } else {
        Complex64::from_polar(w.norm().powf(1.0 / n_k), phase / n_k)
    };
    let top = TopDerivative {
        value,
        radicand: w,
        radicand_phase: phase,
        branch_reset: false,
    };
    Ok((top, next))
}

/// `f^(k)` from `f, ..., f^(k-1)` at `z`. Lower powers use principal
/// arguments. With `prev_top` the root is taken on the sheet nearest to
/// it, ties going to the principal root.
pub fn extract_top_derivative(
    eq: &EquationSpec,
    z: Complex64,
    lower: &[Complex64],
    prev_top: Option<Complex64>,
) -> Result<TopDerivative> {
    eq.validate_shape()?;
    if !(z.norm() < 1.0) {
        return Err(Error::domain(format!("point {z} outside the unit disk")));
    }
    if lower.len() != eq.k {
        return Err(Error::invalid(format!("expected {} lower derivatives, got {}", eq.k, lower.len())));
    }
    let (mut top, _) = top_with_phases(eq, z, lower, &Phases::fresh(eq.k))?;
    let n_k = eq.n_k();
    if let (Some(prev), false, false) = (prev_top, top.branch_reset, n_k == 1.0) {
        let base = principal_arg(top.radicand);
        let modulus = top.radicand.norm().powf(1.0 / n_k);
        let reach = n_k.ceil() as i64 + 1;
        let mut best = (top.value, base, (top.value - prev).norm());
        for step in 1..=reach {
            for m in [step, -step] {
                let phase = base + 2.0 * PI * m as f64;
                let cand = Complex64::from_polar(modulus, phase / n_k);
                let d = (cand - prev).norm();
                if d < best.2 - 1e-12 * (1.0 + best.2) {
                    best = (cand, phase, d);
                }
            }
        }
        top.value = best.0;
        top.radicand_phase = best.1;
    }
    Ok(top)
}

/// One stored point of a ray trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub r: f64,
    /// `f, f', ..., f^(k)` at `r e^{i theta}`.
    pub derivs: Vec<Complex64>,
    /// Tracked arguments of `f, ..., f^(k-1)`.
    pub lower_phases: Vec<f64>,
    /// Tracked argument of the radicand.
    pub radicand_phase: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub branch_resets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub last_good_r: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySolution {
    pub theta: f64,
    pub nu: f64,
    pub r_max: f64,
    pub samples: Vec<RaySample>,
    pub stats: StepStats,
    pub truncated: Option<Truncation>,
}

impl RaySolution {
    /// Unwrapped radicand argument at every sample.
    pub fn branch_phase(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.radicand_phase).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r).collect()
    }

    /// Largest radius reached.
    pub fn reach(&self) -> f64 {
        self.samples.last().map_or(self.nu, |s| s.r)
    }

    /// The sample stored at exactly `r`.
    pub fn sample_at(&self, r: f64) -> Option<&RaySample> {
        self.samples
            .binary_search_by(|s| s.r.total_cmp(&r))
            .ok()
            .map(|i| &self.samples[i])
    }

    /// `f^(j)(r e^{i theta})` by cubic Hermite interpolation between
    /// samples, `j < k`. `None` outside the integrated range.
    pub fn value_at(&self, r: f64, j: usize) -> Option<Complex64> {
        let k = self.samples.first()?.derivs.len() - 1;
        if j >= k || r < self.nu || r > self.reach() {
            return None;
        }
        let i = self.samples.partition_point(|s| s.r < r);
        if self.samples[i.min(self.samples.len() - 1)].r == r {
            return Some(self.samples[i].derivs[j]);
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let rot = Complex64::from_polar(1.0, self.theta);
        Some(hermite(a.r, a.derivs[j], rot * a.derivs[j + 1], b.r, b.derivs[j], rot * b.derivs[j + 1], r))
    }

    /// Scaled equation residual at every sample:
    /// `|(f^(k))^{n_k} + sum A_j (f^(j))^{n_j}| / (1 + sum |A_j| |f^(j)|^{n_j})`.
    pub fn residuals(&self, eq: &EquationSpec) -> Vec<f64> {
        let rot = Complex64::from_polar(1.0, self.theta);
        self.samples
            .iter()
            .map(|s| {
                let z = rot * s.r;
                let n_k = eq.n_k();
                let mut sum = tracked_pow(s.derivs[eq.k], n_k, s.radicand_phase / n_k);
                let mut scale = 1.0;
                for j in 0..eq.k {
                    let a = eq.coefficients[j].eval_unchecked(z);
                    sum += a * tracked_pow(s.derivs[j], eq.exponents[j], s.lower_phases[j]);
                    scale += a.norm() * s.derivs[j].norm().powf(eq.exponents[j]);
                }
                sum.norm() / scale
            })
            .collect()
    }
}

/// Integration settings for one ray.
#[derive(Debug, Clone, PartialEq)]
pub struct RayOptions {
    pub tol: f64,
    /// Radii that must appear among the samples. Empty means a uniform
    /// grid of `default_report_points` radii on `[nu, r_max]`.
    pub report_radii: Vec<f64>,
    pub default_report_points: usize,
    pub max_steps: usize,
    /// Stop once `|f^(k-1)|` exceeds this.
    pub blowup: f64,
}

impl RayOptions {
    pub fn with_tol(tol: f64) -> Self {
        RayOptions {
            tol,
            ..Self::default()
        }
    }
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            tol: 1e-10,
            report_radii: Vec::new(),
            default_report_points: 101,
            max_steps: 200_000,
            blowup: 1e12,
        }
    }
}

struct RaySystem<'a> {
    eq: &'a EquationSpec,
    rot: Complex64,
    phases: Phases,
    last_top: Option<TopDerivative>,
    blowup: f64,
}

impl RaySystem<'_> {
    fn top(&self, r: f64, y: &[Complex64]) -> Result<(TopDerivative, Phases)> {
        top_with_phases(self.eq, self.rot * r, y, &self.phases)
    }
}

impl OdeSystem for RaySystem<'_> {
    fn rhs(&self, r: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        let k = self.eq.k;
        for j in 0..k - 1 {
            dy[j] = self.rot * y[j + 1];
        }
        dy[k - 1] = self.rot * self.top(r, y)?.0.value;
        Ok(())
    }

    fn admissible(&self, r: f64, y: &[Complex64]) -> Result<bool> {
        let (_, next) = self.top(r, y)?;
        let jump = |old: Option<f64>, new: Option<f64>| match (old, new) {
            (Some(a), Some(b)) => (a - b).abs() > PI / 2.0,
            _ => false,
        };
        // integer powers do not depend on the sheet
        let lower = (0..self.eq.k)
            .any(|j| !branch::is_small_integer(self.eq.exponents[j]) && jump(self.phases.lower[j], next.lower[j]));
        let root = self.eq.n_k() != 1.0 && jump(self.phases.radicand, next.radicand);
        Ok(!lower && !root)
    }

    fn accept(&mut self, r: f64, y: &[Complex64]) -> Result<()> {
        let (top, next) = self.top(r, y)?;
        self.phases = next;
        self.last_top = Some(top);
        Ok(())
    }

    fn halt(&self, _r: f64, y: &[Complex64]) -> Option<String> {
        let m = y[self.eq.k - 1].norm();
        (m > self.blowup).then(|| format!("|f^(k-1)| = {m:e} exceeds the blow-up threshold"))
    }
}

fn sample(r: f64, y: &[Complex64], top: &TopDerivative, phases: &Phases) -> RaySample {
    let mut derivs = y.to_vec();
    derivs.push(top.value);
    RaySample {
        r,
        derivs,
        lower_phases: phases.lower.iter().map(|p| p.unwrap_or(0.0)).collect(),
        radicand_phase: top.radicand_phase,
    }
}

/// Integrate along `r e^{i theta}` for `nu <= r <= r_max` from the
/// initial values `f^(j)(nu e^{i theta})`, `j < k`.
pub fn solve_ray(
    eq: &EquationSpec,
    theta: f64,
    nu: f64,
    r_max: f64,
    init: &[Complex64],
    tol: f64,
) -> Result<RaySolution> {
    solve_ray_with(eq, theta, nu, r_max, init, &RayOptions::with_tol(tol))
}

pub fn solve_ray_with(
    eq: &EquationSpec,
    theta: f64,
    nu: f64,
    r_max: f64,
    init: &[Complex64],
    opts: &RayOptions,
) -> Result<RaySolution> {
    eq.validate_shape()?;
    if !(0.0 <= nu && nu < r_max && r_max < 1.0) {
        return Err(Error::domain(format!("need 0 <= nu < r_max < 1, got nu={nu}, r_max={r_max}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    if r_max > eq.trusted_radius() {
        return Err(Error::domain(format!(
            "r_max {r_max} exceeds the coefficients' trusted radius {}",
            eq.trusted_radius()
        )));
    }
    if init.len() != eq.k {
        return Err(Error::invalid(format!("expected {} initial values, got {}", eq.k, init.len())));
    }
    let mut stops: Vec<f64> = if opts.report_radii.is_empty() {
        let n = opts.default_report_points.max(2) - 1;
        (1..=n).map(|i| nu + (r_max - nu) * i as f64 / n as f64).collect()
    } else {
        if let Some(r) = opts.report_radii.iter().find(|&&r| !(nu <= r && r <= r_max)) {
            return Err(Error::domain(format!("report radius {r} outside [{nu}, {r_max}]")));
        }
        opts.report_radii.clone()
    };
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let theta = theta.rem_euclid(2.0 * PI);
    let mut sys = RaySystem {
        eq,
        rot: Complex64::from_polar(1.0, theta),
        phases: Phases::fresh(eq.k),
        last_top: None,
        blowup: opts.blowup,
    };
    let (top0, phases0) = sys.top(nu, init)?;
    let mut stats = StepStats {
        branch_resets: top0.branch_reset as usize,
        ..StepStats::default()
    };
    let mut samples = vec![sample(nu, init, &top0, &phases0)];
    sys.phases = phases0;
    sys.last_top = Some(top0);
    let ctl = StepControl {
        tol: opts.tol,
        max_steps: opts.max_steps,
    };
    let outcome = integrate(&mut sys, nu, init, r_max, &stops, ctl, |s, r, y| {
        let top = s.last_top.expect("accepted step sets the top derivative");
        stats.branch_resets += top.branch_reset as usize;
        samples.push(sample(r, y, &top, &s.phases));
        Ok(())
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => dp5::Outcome {
            t_last: samples.last().map_or(nu, |s| s.r),
            halted: Some(e.to_string()),
            ..dp5::Outcome::default()
        },
    };
    stats.accepted += outcome.accepted;
    stats.rejected += outcome.rejected;
    let truncated = outcome.halted.map(|reason| Truncation {
        last_good_r: samples.last().map_or(nu, |s| s.r),
        reason,
    });
    Ok(RaySolution {
        theta,
        nu,
        r_max,
        samples,
        stats,
        truncated,
    })
}

/// Independent rays, solved in parallel; results are in `thetas` order and
/// identical to sequential [`solve_ray_with`] calls.
pub fn solve_fan<F>(
    eq: &EquationSpec,
    thetas: &[f64],
    nu: f64,
    r_max: f64,
    init_provider: F,
    opts: &RayOptions,
) -> Vec<Result<RaySolution>>
where
    F: Fn(f64) -> Vec<Complex64> + Sync,
{
    thetas
        .par_iter()
        .map(|&theta| solve_ray_with(eq, theta, nu, r_max, &init_provider(theta), opts))
        .collect()
}
