//! CSV and JSON renderings of a run bundle.
//!
//! Every finite float is written as `{:.16e}` (17 significant digits) in
//! both formats, so the two renderings agree digit for digit. Non-finite
//! values become `null` in JSON and `nan`/`inf`/`-inf` in CSV.
//!
//! CSV tables and their columns:
//!
//! | file | columns |
//! |------|---------|
//! | `experiments.csv` | scenario_id, index, experiment, status, message |
//! | `solve.csv` | scenario_id, theta, r, order, re, im, abs, residual, abs_err |
//! | `norms.csv` | scenario_id, target, space, s, t, kernel, form, derivative_order, r_max, value, argmax_re, argmax_im, residual |
//! | `bounds.csv` | scenario_id, bound_id, theta, r, lhs, rhs, margin, pass |
//! | `conditions.csv` | scenario_id, mode, threshold, c, coefficient, weight_exponent, sup, unbounded, coefficient_pass, kernel_condition, kernel_value, kernel_pass, pass |
//! | `volterra.csv` | scenario_id, theta, r, partial_sum, tail, t, s, m, f_bound, f_abs, converged |
//! | `scan.csv` | scenario_id, kernel, derivative_order, r_max, value, argmax_re, argmax_im, slope, trend, truncated_at |
//!
//! In `bounds.csv` a report whose points carry several derivative orders
//! gets one `bound_id` per order, suffixed `_j`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::run::{ExperimentOutput, RecordStatus, RunBundle};
use super::scenario::OutputFormat;
use crate::error::{Error, Result};

/// Float formatting shared by both renderings.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn to_json_string<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub const TABLES: [(&str, &[&str]); 7] = [
    ("experiments", &["scenario_id", "index", "experiment", "status", "message"]),
    ("solve", &["scenario_id", "theta", "r", "order", "re", "im", "abs", "residual", "abs_err"]),
    (
        "norms",
        &[
            "scenario_id", "target", "space", "s", "t", "kernel", "form", "derivative_order", "r_max", "value",
            "argmax_re", "argmax_im", "residual",
        ],
    ),
    ("bounds", &["scenario_id", "bound_id", "theta", "r", "lhs", "rhs", "margin", "pass"]),
    (
        "conditions",
        &[
            "scenario_id", "mode", "threshold", "c", "coefficient", "weight_exponent", "sup", "unbounded",
            "coefficient_pass", "kernel_condition", "kernel_value", "kernel_pass", "pass",
        ],
    ),
    ("volterra", &["scenario_id", "theta", "r", "partial_sum", "tail", "t", "s", "m", "f_bound", "f_abs", "converged"]),
    (
        "scan",
        &[
            "scenario_id", "kernel", "derivative_order", "r_max", "value", "argmax_re", "argmax_im", "slope", "trend",
            "truncated_at",
        ],
    ),
];

/// Rows of every table, keyed like [`TABLES`].
pub fn csv_rows(bundle: &RunBundle) -> Vec<(&'static str, Vec<Vec<String>>)> {
    let id = bundle.scenario_id.clone();
    let mut experiments = Vec::new();
    let mut solve = Vec::new();
    let mut norms = Vec::new();
    let mut bounds = Vec::new();
    let mut conditions = Vec::new();
    let mut volterra = Vec::new();
    let mut scan = Vec::new();
    for rec in &bundle.records {
        experiments.push(vec![
            id.clone(),
            rec.index.to_string(),
            rec.kind.as_str().to_string(),
            match rec.status {
                RecordStatus::Ok => "ok",
                RecordStatus::Error => "error",
            }
            .to_string(),
            rec.error.clone().unwrap_or_default(),
        ]);
        match &rec.output {
            None => {}
            Some(ExperimentOutput::Solve(out)) => {
                for ray in &out.rays {
                    let sol = &ray.solution;
                    for (i, smp) in sol.samples.iter().enumerate() {
                        for (j, d) in smp.derivs.iter().enumerate() {
                            solve.push(vec![
                                id.clone(),
                                fmt_num(sol.theta),
                                fmt_num(smp.r),
                                j.to_string(),
                                fmt_num(d.re),
                                fmt_num(d.im),
                                fmt_num(d.norm()),
                                fmt_num(ray.residual[i]),
                                opt_num(ray.closed_form_error.as_ref().map(|e| e[i][j])),
                            ]);
                        }
                    }
                }
            }
            Some(ExperimentOutput::Norms(records)) => {
                for n in records {
                    let e = &n.estimate;
                    norms.push(vec![
                        id.clone(),
                        n.target.clone(),
                        to_json_string(&e.space),
                        opt_num(e.s),
                        opt_num(e.t),
                        e.kernel.clone().unwrap_or_default(),
                        e.kernel_form.map(|f| to_json_string(&f)).unwrap_or_default(),
                        e.derivative_order.map(|m| m.to_string()).unwrap_or_default(),
                        fmt_num(e.grid.r_max),
                        fmt_num(e.value),
                        fmt_num(e.argmax.re),
                        fmt_num(e.argmax.im),
                        fmt_num(e.residual),
                    ]);
                }
            }
            Some(ExperimentOutput::Bounds(out)) => {
                for r in &out.reports {
                    bounds.extend(bound_rows(&id, r));
                }
            }
            Some(ExperimentOutput::Conditions(checks)) => {
                for ch in checks {
                    for cv in &ch.coefficients {
                        conditions.push(vec![
                            id.clone(),
                            to_json_string(&ch.mode),
                            fmt_num(ch.threshold),
                            opt_num(ch.c),
                            cv.j.to_string(),
                            fmt_num(cv.weight_exponent),
                            fmt_num(cv.sup),
                            cv.unbounded.to_string(),
                            cv.pass.to_string(),
                            to_json_string(&ch.kernel.condition),
                            opt_num(ch.kernel.value),
                            ch.kernel.pass.to_string(),
                            ch.pass.to_string(),
                        ]);
                    }
                }
            }
            Some(ExperimentOutput::Volterra(vs)) => {
                for v in vs {
                    bounds.extend(bound_rows(&id, &v.top_report));
                    bounds.extend(bound_rows(&id, &v.f_report));
                    for (p, &r) in v.r.iter().enumerate() {
                        let f_abs = v.f_report.points.iter().find(|q| q.r == r).map(|q| q.lhs);
                        volterra.push(vec![
                            id.clone(),
                            fmt_num(v.theta),
                            fmt_num(r),
                            fmt_num(v.partial_sums[p]),
                            fmt_num(v.tail[p]),
                            fmt_num(v.t_values[p]),
                            fmt_num(v.s_values[p]),
                            fmt_num(v.m_values[p]),
                            fmt_num(v.f_bound[p]),
                            opt_num(f_abs),
                            v.converged.to_string(),
                        ]);
                    }
                }
            }
            Some(ExperimentOutput::Scan(sc)) => {
                for p in &sc.points {
                    scan.push(vec![
                        id.clone(),
                        sc.kernel.clone(),
                        sc.derivative_order.to_string(),
                        fmt_num(p.r_max),
                        fmt_num(p.value),
                        fmt_num(p.argmax.re),
                        fmt_num(p.argmax.im),
                        fmt_num(sc.slope),
                        to_json_string(&sc.trend),
                        opt_num(sc.truncated_at),
                    ]);
                }
            }
        }
    }
    vec![
        ("experiments", experiments),
        ("solve", solve),
        ("norms", norms),
        ("bounds", bounds),
        ("conditions", conditions),
        ("volterra", volterra),
        ("scan", scan),
    ]
}

fn bound_rows(id: &str, r: &crate::bounds::BoundReport) -> Vec<Vec<String>> {
    let mixed = r.points.windows(2).any(|w| w[0].order != w[1].order);
    r.points
        .iter()
        .map(|p| {
            let bound_id = match (mixed, p.order) {
                (true, Some(j)) => format!("{}_{j}", r.bound_id),
                _ => r.bound_id.clone(),
            };
            vec![
                id.to_string(),
                bound_id,
                fmt_num(r.theta),
                fmt_num(p.r),
                fmt_num(p.lhs),
                fmt_num(p.rhs),
                fmt_num(p.margin),
                p.pass.to_string(),
            ]
        })
        .collect()
}

/// Every table as CSV text, headers included even when empty.
pub fn render_csv(bundle: &RunBundle) -> Result<Vec<(&'static str, String)>> {
    let rows = csv_rows(bundle);
    let mut out = Vec::new();
    for ((name, header), (_, rows)) in TABLES.iter().zip(rows) {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(*header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push((*name, String::from_utf8(bytes).expect("csv output is utf-8")));
    }
    Ok(out)
}

/// The bundle as one JSON document with sorted keys and fixed float format.
pub fn render_json(bundle: &RunBundle) -> Result<String> {
    let value = serde_json::to_value(bundle).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = String::new();
    write_value(&mut s, &value, 0);
    s.push('\n');
    Ok(s)
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                out.push_str(&fmt_num(x));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short scalar arrays on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, depth);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, depth + 1);
                let _ = write!(out, "{}: ", Value::String(k.clone()));
                write_value(out, x, depth + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

/// Write the bundle under `dir`; returns the files written.
pub fn emit_report(bundle: &RunBundle, dir: impl AsRef<Path>, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    match format {
        OutputFormat::Json => put("bundle.json".to_string(), render_json(bundle)?)?,
        OutputFormat::Csv => {
            for (name, text) in render_csv(bundle)? {
                put(format!("{name}.csv"), text)?;
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::run_scenario;
    use crate::harness::scenario::Scenario;

    #[test]
    fn empty_bundle_gives_headers_only() {
        let b = run_scenario(&Scenario::for_catalog("e", "cos_linear")).unwrap();
        for (name, text) in render_csv(&b).unwrap() {
            assert_eq!(text.lines().count(), 1, "{name}");
        }
        let bounds = &render_csv(&b).unwrap()[3].1;
        assert_eq!(bounds.trim(), "scenario_id,bound_id,theta,r,lhs,rhs,margin,pass");
    }

    #[test]
    fn json_and_csv_share_digits() {
        let mut s = Scenario::for_catalog("j", "rot_nonlinear");
        s.solver.rays = 2;
        s.solver.report_points = 5;
        s.solver.r_max = 0.5;
        s.experiments = vec![crate::harness::scenario::Experiment::Bounds {
            bounds: vec![crate::harness::scenario::BoundKind::Growth],
            epsilon: vec![0.1],
            hinf_s: vec![],
        }];
        let b = run_scenario(&s).unwrap();
        let json = render_json(&b).unwrap();
        let parsed: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["scenario_id"], "j");
        let csv = &render_csv(&b).unwrap()[3].1;
        let mut rows = 0;
        for line in csv.lines().skip(1) {
            let lhs = line.split(',').nth(4).unwrap();
            assert!(json.contains(lhs), "{lhs}");
            rows += 1;
        }
        let points: usize = b.bound_reports().iter().map(|r| r.points.len()).sum();
        assert_eq!(rows, points);
        assert!(rows >= 10);
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(f64::NAN), "nan");
        let x: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert_eq!(x, std::f64::consts::PI);
    }
}
