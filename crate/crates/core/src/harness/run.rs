//! Experiment orchestration.
//!
//! Experiments run in stages: the ray fan first, then everything that
//! does not need it, then the bounds. Results come back in the order the
//! scenario lists them, and an error in one experiment is recorded
//! without stopping the others.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::catalog::CatalogEntry;
use super::scenario::{BoundKind, Experiment, ExperimentKind, NormFunction, NormRequest, Scenario};
use crate::analytic::AnalyticFn;
use crate::bounds::{
    bloch_growth_bound, check_majorant_hypotheses, comparison_check, derivative_growth_bound, growth_bound,
    herold_majorant, hinf_growth_bound, volterra_series_bound, BlochGrowthReport, BoundReport, BoundStatus,
    VolterraBound, VolterraOptions,
};
use crate::conditions::{check_hypotheses, membership_scan, ConditionCheckConfig, HypothesisCheck, MembershipScan, ScanSettings};
use crate::error::{Error, Result};
use crate::quadrature::disk_quadrature;
use crate::ray_solver::{solve_fan, RayOptions, RaySolution};
use crate::spaces::{bers_norm, bloch_type_norm, default_a_grid, qk_seminorm, weighted_hardy_norm, NormEstimate, SpaceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub solution: RaySolution,
    /// Scaled equation residual at every sample.
    pub residual: Vec<f64>,
    /// `|f^(j) - exact^(j)|` per sample and order, when a closed form exists.
    pub closed_form_error: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub rays: Vec<RayRecord>,
    pub max_residual: f64,
    pub max_closed_form_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub target: String,
    pub estimate: NormEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsOutput {
    pub reports: Vec<BoundReport>,
    /// Bloch-coefficient reports with their logarithmic fit.
    pub bloch: Vec<BlochGrowthReport>,
    /// Estimates whose hypotheses the equation does not meet.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentOutput {
    Solve(SolveOutput),
    Norms(Vec<NormRecord>),
    Bounds(BoundsOutput),
    Conditions(Vec<HypothesisCheck>),
    Volterra(Vec<VolterraBound>),
    Scan(MembershipScan),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub index: usize,
    pub kind: ExperimentKind,
    pub status: RecordStatus,
    pub error: Option<String>,
    pub output: Option<ExperimentOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunBundle {
    pub scenario_id: String,
    pub scenario: Scenario,
    pub records: Vec<ExperimentRecord>,
}

impl RunBundle {
    /// Every bound report in the bundle.
    pub fn bound_reports(&self) -> Vec<&BoundReport> {
        let mut out = Vec::new();
        for r in &self.records {
            match &r.output {
                Some(ExperimentOutput::Bounds(b)) => out.extend(b.reports.iter()),
                Some(ExperimentOutput::Volterra(v)) => {
                    for b in v {
                        out.push(&b.top_report);
                        out.push(&b.f_report);
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// An experiment errored or a bound check failed.
    pub fn has_failures(&self) -> bool {
        self.records.iter().any(|r| r.status == RecordStatus::Error)
            || self.bound_reports().iter().any(|b| b.status == BoundStatus::Fail)
    }

    pub fn record(&self, kind: ExperimentKind) -> Option<&ExperimentRecord> {
        self.records.iter().find(|r| r.kind == kind)
    }
}

/// Test hooks for the orchestrator.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Make the ray fan fail as if the solver had errored.
    pub fail_solve: bool,
}

pub fn run_scenario(s: &Scenario) -> Result<RunBundle> {
    run_scenario_with(s, &RunOptions::default())
}

pub fn run_scenario_with(s: &Scenario, opts: &RunOptions) -> Result<RunBundle> {
    s.validate()?;
    let entry = s.resolve()?;
    let needs_rays = s
        .experiments
        .iter()
        .any(|e| matches!(e.kind(), ExperimentKind::Solve | ExperimentKind::Bounds));
    let rays: std::result::Result<Vec<RaySolution>, String> = if !needs_rays {
        Ok(Vec::new())
    } else if opts.fail_solve {
        Err("injected solver failure".to_string())
    } else {
        solve_rays(s, &entry).map_err(|e| e.to_string())
    };

    let mut order: Vec<usize> = (0..s.experiments.len()).collect();
    order.sort_by_key(|&i| (s.experiments[i].kind().stage(), i));
    let mut records = Vec::with_capacity(order.len());
    for i in order {
        let ex = &s.experiments[i];
        let outcome = match ex.kind() {
            ExperimentKind::Solve | ExperimentKind::Bounds => match &rays {
                Ok(rays) => run_experiment(ex, s, &entry, rays),
                Err(msg) => Err(Error::precondition(format!("ray solutions unavailable: {msg}"))),
            },
            _ => run_experiment(ex, s, &entry, &[]),
        };
        records.push(match outcome {
            Ok(output) => ExperimentRecord {
                index: i,
                kind: ex.kind(),
                status: RecordStatus::Ok,
                error: None,
                output: Some(output),
            },
            Err(e) => ExperimentRecord {
                index: i,
                kind: ex.kind(),
                status: RecordStatus::Error,
                error: Some(e.to_string()),
                output: None,
            },
        });
    }
    records.sort_by_key(|r| r.index);
    Ok(RunBundle {
        scenario_id: s.id.clone(),
        scenario: s.clone(),
        records,
    })
}

fn solve_rays(s: &Scenario, entry: &CatalogEntry) -> Result<Vec<RaySolution>> {
    let opts = RayOptions {
        default_report_points: s.solver.report_points,
        ..RayOptions::with_tol(s.solver.tol)
    };
    solve_fan(&entry.equation, &s.solver.thetas(), entry.nu, s.solver.r_max, |t| entry.init_at(t), &opts)
        .into_iter()
        .collect()
}

fn run_experiment(ex: &Experiment, s: &Scenario, entry: &CatalogEntry, rays: &[RaySolution]) -> Result<ExperimentOutput> {
    let eq = &entry.equation;
    match ex {
        Experiment::Solve {} => Ok(ExperimentOutput::Solve(solve_output(entry, rays))),
        Experiment::Norms { targets } => {
            let defaults;
            let targets = if targets.is_empty() {
                defaults = default_norm_targets(entry);
                &defaults
            } else {
                targets
            };
            let records = targets
                .iter()
                .map(|t| norm_record(t, s, entry))
                .collect::<Result<Vec<_>>>()?;
            Ok(ExperimentOutput::Norms(records))
        }
        Experiment::Bounds { bounds, epsilon, hinf_s } => {
            run_bounds(bounds, epsilon, hinf_s, s, entry, rays).map(ExperimentOutput::Bounds)
        }
        Experiment::Conditions {
            mode,
            c,
            thresholds,
            r_max,
            radial_n,
            angular_n,
        } => {
            let checks = thresholds
                .iter()
                .map(|&tau| {
                    let cfg = ConditionCheckConfig {
                        r_max: *r_max,
                        radial_n: *radial_n,
                        angular_n: *angular_n,
                        ..ConditionCheckConfig::new(tau, s.kernel.clone(), *mode, *c)
                    };
                    check_hypotheses(eq, &cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ExperimentOutput::Conditions(checks))
        }
        Experiment::Volterra { thetas, r_grid, tol } => {
            if entry.nu != 0.0 {
                return Err(Error::precondition("the series bound integrates from the origin; nu must be 0"));
            }
            let opts = VolterraOptions {
                tol: *tol,
                ..VolterraOptions::default()
            };
            let out = thetas
                .iter()
                .map(|&th| volterra_series_bound(eq, th, &entry.init_at(th), r_grid, &opts))
                .collect::<Result<Vec<_>>>()?;
            Ok(ExperimentOutput::Volterra(out))
        }
        Experiment::Scan {
            r_max_seq,
            radial_n,
            angular_n,
            derivative_order,
            a_grid,
        } => {
            if entry.nu != 0.0 {
                return Err(Error::precondition("the scan solves rays from the origin; nu must be 0"));
            }
            let settings = ScanSettings {
                tol: s.solver.tol,
                radial_n: *radial_n,
                angular_n: *angular_n,
                derivative_order: *derivative_order,
                init: entry.init_at(0.0),
            };
            let a = a_grid.clone().unwrap_or_else(default_a_grid);
            membership_scan(eq, &s.kernel, &a, r_max_seq, &settings).map(ExperimentOutput::Scan)
        }
    }
}

fn solve_output(entry: &CatalogEntry, rays: &[RaySolution]) -> SolveOutput {
    let mut max_residual = 0.0f64;
    let mut max_err: Option<f64> = None;
    let records = rays
        .iter()
        .map(|sol| {
            let residual = sol.residuals(&entry.equation);
            max_residual = residual.iter().cloned().fold(max_residual, f64::max);
            let closed_form_error = entry.closed_form.map(|f| {
                sol.samples
                    .iter()
                    .map(|smp| {
                        let exact = f(Complex64::from_polar(smp.r, sol.theta));
                        smp.derivs.iter().zip(&exact).map(|(a, b)| (a - b).norm()).collect::<Vec<f64>>()
                    })
                    .collect::<Vec<_>>()
            });
            if let Some(errs) = &closed_form_error {
                let m = errs.iter().flatten().cloned().fold(0.0, f64::max);
                max_err = Some(max_err.map_or(m, |e| e.max(m)));
            }
            RayRecord {
                solution: sol.clone(),
                residual,
                closed_form_error,
            }
        })
        .collect();
    SolveOutput {
        rays: records,
        max_residual,
        max_closed_form_error: max_err,
    }
}

fn default_norm_targets(entry: &CatalogEntry) -> Vec<NormRequest> {
    let mut out = Vec::new();
    for (j, a) in entry.equation.coefficients.iter().enumerate() {
        if a.is_identically_zero() {
            continue;
        }
        for space in [SpaceTag::BlochS, SpaceTag::BersS] {
            out.push(NormRequest {
                function: NormFunction::Coefficient(j),
                space,
                s: Some(1.0),
                t: None,
                form: Default::default(),
                derivative_order: 1,
                r_max: 0.999_f64.min(a.trusted_radius()),
                radial_n: 64,
                angular_n: 64,
            });
        }
    }
    out
}

fn norm_record(t: &NormRequest, s: &Scenario, entry: &CatalogEntry) -> Result<NormRecord> {
    let (label, f): (String, AnalyticFn) = match &t.function {
        NormFunction::Coefficient(j) => (format!("A_{j}"), entry.equation.coefficients[*j].clone()),
        NormFunction::Inline(f) => ("inline".to_string(), f.clone()),
    };
    let grid = disk_quadrature(t.r_max, t.radial_n, t.angular_n, None)?;
    let estimate = match t.space {
        SpaceTag::BlochS => bloch_type_norm(&f, t.s.unwrap_or(1.0), &grid)?,
        SpaceTag::BersS => bers_norm(&f, t.s.unwrap_or(1.0), &grid)?,
        SpaceTag::HardyST => {
            let n = 16 * t.radial_n;
            let radii: Vec<f64> = (0..=n).map(|i| t.r_max * i as f64 / n as f64).collect();
            weighted_hardy_norm(&f, t.s.unwrap_or(0.0), t.t.unwrap_or(2.0), &radii, t.angular_n)?
        }
        SpaceTag::Qk => qk_seminorm(&f, &s.kernel, &default_a_grid(), &grid, t.form, t.derivative_order)?,
    };
    Ok(NormRecord { target: label, estimate })
}

fn tag(mut r: BoundReport, suffix: String) -> BoundReport {
    r.bound_id = format!("{}[{suffix}]", r.bound_id);
    r
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::Hypothesis(_) | Error::Precondition(_))
}

fn run_bounds(
    kinds: &[BoundKind],
    epsilons: &[f64],
    hinf_s: &[f64],
    s: &Scenario,
    entry: &CatalogEntry,
    rays: &[RaySolution],
) -> Result<BoundsOutput> {
    let eq = &entry.equation;
    let mut out = BoundsOutput {
        reports: Vec::new(),
        bloch: Vec::new(),
        skipped: Vec::new(),
    };
    let skip = |out: &mut BoundsOutput, what: &str, theta: f64, e: Error| -> Result<()> {
        if skippable(&e) {
            let msg = format!("{what} (theta = {theta}): {e}");
            if !out.skipped.contains(&msg) {
                out.skipped.push(msg);
            }
            Ok(())
        } else {
            Err(e)
        }
    };
    // coefficient norms sup (1-|z|^2)^s |A_j| for the H^inf estimate
    let hinf_norms: Vec<(f64, Vec<f64>)> = if kinds.contains(&BoundKind::Hinf) {
        let r = s.solver.r_max.min(eq.trusted_radius());
        let grid = disk_quadrature(r, 48, 48, None)?;
        hinf_s
            .iter()
            .map(|&w| {
                let norms = eq
                    .coefficients
                    .iter()
                    .map(|a| bers_norm(a, w, &grid).map(|n| n.value))
                    .collect::<Result<Vec<_>>>()?;
                Ok((w, norms))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    for sol in rays {
        let th = sol.theta;
        for kind in kinds {
            for &eps in epsilons {
                match kind {
                    BoundKind::Growth => match growth_bound(eq, sol, eps) {
                        Ok(r) => out.reports.push(tag(r, format!("eps={eps}"))),
                        Err(e) => skip(&mut out, "growth", th, e)?,
                    },
                    BoundKind::DerivativeGrowth => match derivative_growth_bound(eq, sol, eps) {
                        Ok(rs) => out.reports.extend(rs.into_iter().map(|r| tag(r, format!("eps={eps}")))),
                        Err(e) => skip(&mut out, "derivative_growth", th, e)?,
                    },
                    BoundKind::Hinf => {
                        for (w, norms) in &hinf_norms {
                            match hinf_growth_bound(eq, sol, *w, norms, eps) {
                                Ok(r) => out.reports.push(tag(r, format!("s={w},eps={eps}"))),
                                Err(e) => skip(&mut out, "hinf_growth", th, e)?,
                            }
                        }
                    }
                    BoundKind::Bloch => {
                        let m = entry.bloch_m.expect("validated");
                        match bloch_growth_bound(eq, sol, m, eps) {
                            Ok(mut b) => {
                                b.report = tag(b.report, format!("eps={eps}"));
                                out.reports.push(b.report.clone());
                                out.bloch.push(b);
                            }
                            Err(e) => skip(&mut out, "bloch_growth", th, e)?,
                        }
                    }
                    BoundKind::Comparison => {
                        // independent of epsilon
                        if eps != epsilons[0] {
                            continue;
                        }
                        let mp = entry.majorant.as_ref().expect("validated");
                        let radii = sol.radii();
                        let res = herold_majorant(mp, sol.reach(), 1e-12, &radii).and_then(|u| {
                            let hyp = check_majorant_hypotheses(mp, eq, th, &radii, &entry.init_at(th))?;
                            Ok(comparison_check(sol, &u, mp, &hyp))
                        });
                        match res {
                            Ok(r) => out.reports.push(r),
                            Err(e) => skip(&mut out, "comparison", th, e)?,
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
