//! Scenario files: one JSON document per run, versioned by
//! `schema_version`. Every optional field has a default, and a loaded
//! scenario serializes back with all defaults spelled out.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::catalog::{self, CatalogEntry};
use crate::analytic::AnalyticFn;
use crate::bounds::MajorantProblem;
use crate::conditions::TheoremMode;
use crate::error::{Error, Result};
use crate::kernels::KernelWeight;
use crate::ray_solver::EquationSpec;
use crate::spaces::{KernelForm, SpaceTag};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub id: String,
    pub equation: EquationSource,
    #[serde(default = "default_kernel")]
    pub kernel: KernelWeight,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_kernel() -> KernelWeight {
    KernelWeight::Power { p: 0.5 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationSource {
    Catalog(String),
    Inline(InlineEquation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineEquation {
    pub k: usize,
    pub exponents: Vec<f64>,
    pub coefficients: Vec<AnalyticFn>,
    /// `f(z_theta), ..., f^(k-1)(z_theta)`, the same on every ray.
    pub init: Vec<Complex64>,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub majorant: Option<MajorantProblem>,
    #[serde(default)]
    pub bloch_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    /// Equally spaced rays `2 pi m / rays`.
    #[serde(default = "default_rays")]
    pub rays: usize,
    /// Reported radii per ray, uniform on `[nu, r_max]`.
    #[serde(default = "default_report_points")]
    pub report_points: usize,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_r_max() -> f64 {
    0.999
}
fn default_rays() -> usize {
    8
}
fn default_report_points() -> usize {
    101
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: default_tol(),
            r_max: default_r_max(),
            rays: default_rays(),
            report_points: default_report_points(),
        }
    }
}

impl SolverSettings {
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.rays).map(|m| 2.0 * PI * m as f64 / self.rays as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Solve,
    Norms,
    Bounds,
    Conditions,
    Volterra,
    Scan,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Norms => "norms",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::Conditions => "conditions",
            ExperimentKind::Volterra => "volterra",
            ExperimentKind::Scan => "scan",
        }
    }

    /// Stage in which the experiment runs; ray solutions exist from stage 1 on.
    pub fn stage(self) -> u8 {
        match self {
            ExperimentKind::Solve => 0,
            ExperimentKind::Bounds => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Solve {},
    Norms {
        #[serde(default)]
        targets: Vec<NormRequest>,
    },
    Bounds {
        #[serde(default = "default_bound_kinds")]
        bounds: Vec<BoundKind>,
        #[serde(default = "default_epsilons")]
        epsilon: Vec<f64>,
        /// Weights `s` of the coefficient-norm bound.
        #[serde(default = "default_hinf_s")]
        hinf_s: Vec<f64>,
    },
    Conditions {
        mode: TheoremMode,
        #[serde(default)]
        c: Option<f64>,
        thresholds: Vec<f64>,
        #[serde(default = "default_check_r_max")]
        r_max: f64,
        #[serde(default = "default_check_n")]
        radial_n: usize,
        #[serde(default = "default_check_n")]
        angular_n: usize,
    },
    Volterra {
        #[serde(default = "default_volterra_thetas")]
        thetas: Vec<f64>,
        #[serde(default = "default_volterra_grid")]
        r_grid: Vec<f64>,
        #[serde(default = "default_volterra_tol")]
        tol: f64,
    },
    Scan {
        #[serde(default = "default_scan_radii")]
        r_max_seq: Vec<f64>,
        #[serde(default = "default_scan_radial")]
        radial_n: usize,
        #[serde(default = "default_scan_angular")]
        angular_n: usize,
        #[serde(default)]
        derivative_order: Option<usize>,
        /// Base points; `None` means the origin plus 16 angles on five radii.
        #[serde(default)]
        a_grid: Option<Vec<Complex64>>,
    },
}

fn default_bound_kinds() -> Vec<BoundKind> {
    vec![BoundKind::Growth, BoundKind::DerivativeGrowth]
}
fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.5]
}
fn default_hinf_s() -> Vec<f64> {
    vec![0.0, 0.5]
}
fn default_check_r_max() -> f64 {
    0.999
}
fn default_check_n() -> usize {
    32
}
fn default_volterra_thetas() -> Vec<f64> {
    vec![0.0]
}
fn default_volterra_grid() -> Vec<f64> {
    (1..=18).map(|i| i as f64 * 0.05).collect()
}
fn default_volterra_tol() -> f64 {
    1e-12
}
fn default_scan_radii() -> Vec<f64> {
    vec![0.9, 0.99, 0.999]
}
fn default_scan_radial() -> usize {
    24
}
fn default_scan_angular() -> usize {
    128
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::Solve { .. } => ExperimentKind::Solve,
            Experiment::Norms { .. } => ExperimentKind::Norms,
            Experiment::Bounds { .. } => ExperimentKind::Bounds,
            Experiment::Conditions { .. } => ExperimentKind::Conditions,
            Experiment::Volterra { .. } => ExperimentKind::Volterra,
            Experiment::Scan { .. } => ExperimentKind::Scan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Growth,
    DerivativeGrowth,
    Hinf,
    Bloch,
    Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFunction {
    /// `A_j` of the scenario's equation.
    Coefficient(usize),
    Inline(AnalyticFn),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormRequest {
    pub function: NormFunction,
    pub space: SpaceTag,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub form: KernelForm,
    #[serde(default = "default_order")]
    pub derivative_order: usize,
    #[serde(default = "default_norm_r_max")]
    pub r_max: f64,
    #[serde(default = "default_norm_n")]
    pub radial_n: usize,
    #[serde(default = "default_norm_n")]
    pub angular_n: usize,
}

fn default_order() -> usize {
    1
}
fn default_norm_r_max() -> f64 {
    0.999
}
fn default_norm_n() -> usize {
    64
}

impl Scenario {
    /// A scenario with no experiments for a catalog entry.
    pub fn for_catalog(id: &str, name: &str) -> Scenario {
        Scenario {
            schema_version: SCHEMA_VERSION,
            id: id.to_string(),
            equation: EquationSource::Catalog(name.to_string()),
            kernel: default_kernel(),
            solver: SolverSettings::default(),
            experiments: Vec::new(),
            output: OutputSettings::default(),
        }
    }

    /// Resolve the equation source into a catalog-shaped entry.
    pub fn resolve(&self) -> Result<CatalogEntry> {
        match &self.equation {
            EquationSource::Catalog(name) => catalog::lookup(name),
            EquationSource::Inline(inline) => {
                let equation = EquationSpec {
                    k: inline.k,
                    exponents: inline.exponents.clone(),
                    coefficients: inline.coefficients.clone(),
                };
                equation.validate_shape()?;
                if inline.init.len() != inline.k {
                    return Err(Error::invalid(format!(
                        "equation.inline.init: expected {} values, got {}",
                        inline.k,
                        inline.init.len()
                    )));
                }
                Ok(CatalogEntry {
                    name: "inline",
                    description: "inline equation",
                    equation,
                    nu: inline.nu,
                    init: inline.init.clone(),
                    closed_form: None,
                    majorant: inline.majorant.clone(),
                    bloch_m: inline.bloch_m,
                    note: "",
                })
            }
        }
    }

    /// Semantic checks beyond the schema; messages carry field paths.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.id.trim().is_empty() {
            return Err(Error::invalid("id: must not be empty"));
        }
        let entry = self.resolve()?;
        self.kernel.validate().map_err(|e| field("kernel", e))?;
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(Error::invalid(format!("solver.tol: {} outside (0, 1)", s.tol)));
        }
        if !(s.r_max > entry.nu && s.r_max < 1.0) {
            return Err(Error::invalid(format!("solver.r_max: {} outside ({}, 1)", s.r_max, entry.nu)));
        }
        if s.rays == 0 || s.report_points < 2 {
            return Err(Error::invalid("solver: rays must be >= 1 and report_points >= 2"));
        }
        for (i, ex) in self.experiments.iter().enumerate() {
            validate_experiment(ex, &entry).map_err(|e| field(&format!("experiments[{i}]"), e))?;
        }
        Ok(())
    }
}

fn field(path: &str, e: Error) -> Error {
    let msg = match e {
        Error::Invalid(m) | Error::Domain(m) | Error::Hypothesis(m) | Error::Precondition(m) => m,
        other => other.to_string(),
    };
    Error::invalid(format!("{path}: {msg}"))
}

fn increasing_in_unit(xs: &[f64]) -> bool {
    !xs.is_empty() && xs.iter().all(|&x| x > 0.0 && x < 1.0) && xs.windows(2).all(|w| w[1] > w[0])
}

fn validate_experiment(ex: &Experiment, entry: &CatalogEntry) -> Result<()> {
    match ex {
        Experiment::Solve {} => Ok(()),
        Experiment::Norms { targets } => {
            for (i, t) in targets.iter().enumerate() {
                let path = format!("targets[{i}]");
                if let NormFunction::Coefficient(j) = t.function {
                    if j >= entry.equation.k {
                        return Err(Error::invalid(format!("{path}.function: no coefficient A_{j}")));
                    }
                }
                if !(t.r_max > 0.0 && t.r_max < 1.0) {
                    return Err(Error::invalid(format!("{path}.r_max: {} outside (0, 1)", t.r_max)));
                }
                let needs_s = matches!(t.space, SpaceTag::BlochS | SpaceTag::BersS | SpaceTag::HardyST);
                if needs_s && t.s.is_none() {
                    return Err(Error::invalid(format!("{path}.s: required for this space")));
                }
                if t.space == SpaceTag::HardyST && t.t.is_none() {
                    return Err(Error::invalid(format!("{path}.t: required for the weighted Hardy norm")));
                }
            }
            Ok(())
        }
        Experiment::Bounds { bounds, epsilon, hinf_s } => {
            if epsilon.is_empty() || epsilon.iter().any(|&e| !(e > 0.0)) {
                return Err(Error::invalid("epsilon: values must be > 0"));
            }
            if hinf_s.iter().any(|s| !(0.0..1.0).contains(s)) {
                return Err(Error::invalid("hinf_s: values must lie in [0, 1)"));
            }
            if bounds.contains(&BoundKind::Comparison) && entry.majorant.is_none() {
                return Err(Error::invalid("bounds: comparison needs a majorant"));
            }
            if bounds.contains(&BoundKind::Bloch) && entry.bloch_m.is_none() {
                return Err(Error::invalid("bounds: bloch needs bloch_m"));
            }
            Ok(())
        }
        Experiment::Conditions { mode, c, thresholds, .. } => {
            if *mode == TheoremMode::ThmAlpha {
                match c {
                    None => return Err(Error::invalid("c: required in thm_alpha mode")),
                    Some(c) if !(*c > 1.0 && *c < 1.5) => {
                        return Err(Error::invalid(format!("c: {c} outside (1,3/2)")))
                    }
                    _ => {}
                }
            }
            if thresholds.is_empty() || thresholds.iter().any(|&t| !(t > 0.0)) {
                return Err(Error::invalid("thresholds: need at least one positive threshold"));
            }
            Ok(())
        }
        Experiment::Volterra { r_grid, tol, .. } => {
            if !increasing_in_unit(r_grid) {
                return Err(Error::invalid("r_grid: must increase strictly inside (0, 1)"));
            }
            if !(*tol > 0.0) {
                return Err(Error::invalid("tol: must be > 0"));
            }
            Ok(())
        }
        Experiment::Scan {
            r_max_seq,
            derivative_order,
            a_grid,
            ..
        } => {
            if !increasing_in_unit(r_max_seq) {
                return Err(Error::invalid("r_max_seq: must increase strictly inside (0, 1)"));
            }
            if let Some(m) = derivative_order {
                if *m < 1 || *m > entry.equation.k {
                    return Err(Error::invalid(format!("derivative_order: {m} outside 1..={}", entry.equation.k)));
                }
            }
            if let Some(a) = a_grid {
                if a.is_empty() || a.iter().any(|a| !(a.norm() < 1.0)) {
                    return Err(Error::invalid("a_grid: base points must lie inside the disk"));
                }
            }
            Ok(())
        }
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::invalid(format!("{path}: {}", e.inner()))
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_scenario(&text)
}

/// Scenario ids must be unique within one run.
pub fn check_unique_ids(scenarios: &[Scenario]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in scenarios {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::invalid(format!("id: duplicate scenario id '{}'", s.id)));
        }
    }
    Ok(())
}
