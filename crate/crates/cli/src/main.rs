use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlde_core::harness::scenario::{BoundKind, Experiment, OutputFormat};
use nlde_core::harness::{self, RunBundle, Scenario};
use nlde_core::kernels::KernelWeight;
use nlde_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "nlde", version, about = "Ray solver, norms and growth-bound checks for nonlinear ODEs on the unit disk")]
struct Cli {
    /// Directory for report files; without it the report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Solver tolerance, overriding the scenario.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Alpha,
    Beta,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Bound {
    Growth,
    DerivativeGrowth,
    Hinf,
    Bloch,
    Comparison,
}

#[derive(Args, Debug)]
struct Common {
    /// Catalog entry (see `catalog list`).
    catalog: String,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    rays: Option<usize>,
    #[arg(long)]
    report_points: Option<usize>,
    /// Exponent p of the kernel K(t) = t^p.
    #[arg(long)]
    kernel_p: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the equation on a fan of rays.
    Solve(Common),
    /// Bloch and Bers norms of the coefficients.
    Norms(Common),
    /// Check growth estimates against ray solutions.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long = "bound", value_enum)]
        bounds: Vec<Bound>,
        #[arg(long = "epsilon")]
        epsilon: Vec<f64>,
        #[arg(long = "hinf-s")]
        hinf_s: Vec<f64>,
    },
    /// Coefficient and kernel hypotheses of the membership theorems.
    Conditions {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long = "threshold", required = true)]
        thresholds: Vec<f64>,
    },
    /// Iterated-kernel series bound.
    Volterra {
        #[command(flatten)]
        common: Common,
        #[arg(long = "theta")]
        thetas: Vec<f64>,
    },
    /// Empirical Q_K integral scan toward the boundary.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long = "radius")]
        radii: Vec<f64>,
    },
    /// Run a scenario file.
    Run { scenario: PathBuf },
    /// Catalog operations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Validate a scenario file and print it with defaults filled in.
    Validate { scenario: PathBuf },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List,
}

fn scenario_from(common: &Common, label: &str, experiment: Experiment) -> Scenario {
    let mut s = Scenario::for_catalog(&format!("{}_{label}", common.catalog), &common.catalog);
    if let Some(r) = common.r_max {
        s.solver.r_max = r;
    }
    if let Some(n) = common.rays {
        s.solver.rays = n;
    }
    if let Some(n) = common.report_points {
        s.solver.report_points = n;
    }
    if let Some(p) = common.kernel_p {
        s.kernel = KernelWeight::Power { p };
    }
    s.experiments.push(experiment);
    s
}

fn default_experiment(kind: &str) -> Experiment {
    let text = format!(r#"{{"type": "{kind}"}}"#);
    serde_json::from_str(&text).expect("experiment defaults")
}

fn build_scenario(command: &Command) -> Result<Scenario, Error> {
    let s = match command {
        Command::Solve(c) => scenario_from(c, "solve", Experiment::Solve {}),
        Command::Norms(c) => scenario_from(c, "norms", Experiment::Norms { targets: Vec::new() }),
        Command::Bounds {
            common,
            bounds,
            epsilon,
            hinf_s,
        } => {
            let Experiment::Bounds {
                bounds: db,
                epsilon: de,
                hinf_s: ds,
            } = default_experiment("bounds")
            else {
                unreachable!()
            };
            let kinds = if bounds.is_empty() {
                db
            } else {
                bounds
                    .iter()
                    .map(|b| match b {
                        Bound::Growth => BoundKind::Growth,
                        Bound::DerivativeGrowth => BoundKind::DerivativeGrowth,
                        Bound::Hinf => BoundKind::Hinf,
                        Bound::Bloch => BoundKind::Bloch,
                        Bound::Comparison => BoundKind::Comparison,
                    })
                    .collect()
            };
            let exp = Experiment::Bounds {
                bounds: kinds,
                epsilon: if epsilon.is_empty() { de } else { epsilon.clone() },
                hinf_s: if hinf_s.is_empty() { ds } else { hinf_s.clone() },
            };
            scenario_from(common, "bounds", exp)
        }
        Command::Conditions {
            common,
            mode,
            c,
            thresholds,
        } => {
            let mode = match mode {
                Mode::Alpha => "thm_alpha",
                Mode::Beta => "thm_beta",
            };
            let text = serde_json::json!({"type": "conditions", "mode": mode, "c": c, "thresholds": thresholds});
            let exp: Experiment = serde_json::from_value(text).map_err(|e| Error::Invalid(e.to_string()))?;
            scenario_from(common, "conditions", exp)
        }
        Command::Volterra { common, thetas } => {
            let mut exp = default_experiment("volterra");
            if let Experiment::Volterra { thetas: t, .. } = &mut exp {
                if !thetas.is_empty() {
                    *t = thetas.clone();
                }
            }
            scenario_from(common, "volterra", exp)
        }
        Command::Scan { common, radii } => {
            let mut exp = default_experiment("scan");
            if let Experiment::Scan { r_max_seq, .. } = &mut exp {
                if !radii.is_empty() {
                    *r_max_seq = radii.clone();
                }
            }
            scenario_from(common, "scan", exp)
        }
        Command::Run { scenario } => harness::load_scenario(scenario)?,
        Command::Catalog { .. } | Command::Validate { .. } => unreachable!("handled before"),
    };
    Ok(s)
}

fn summary(bundle: &RunBundle) {
    for rec in &bundle.records {
        match &rec.error {
            Some(e) => eprintln!("[{}] {}: error: {e}", bundle.scenario_id, rec.kind.as_str()),
            None => eprintln!("[{}] {}: ok", bundle.scenario_id, rec.kind.as_str()),
        }
    }
    let reports = bundle.bound_reports();
    if !reports.is_empty() {
        let count = |st| reports.iter().filter(|r| r.status == st).count();
        use nlde_core::bounds::BoundStatus::*;
        eprintln!(
            "[{}] bound reports: {} pass, {} fail, {} hypotheses unmet, {} not converged",
            bundle.scenario_id,
            count(Pass),
            count(Fail),
            count(HypothesesUnmet),
            count(NotConverged)
        );
    }
}

fn run(cli: Cli) -> Result<u8, (u8, String)> {
    let invalid = |e: Error| (EXIT_INVALID, e.to_string());
    if let Err(e) = harness::validate_catalog() {
        return Err((EXIT_FAILURE, format!("catalog self-validation failed: {e}")));
    }
    match &cli.command {
        Command::Catalog { action: CatalogAction::List } => {
            for e in harness::catalog() {
                let closed = if e.closed_form.is_some() { "closed form" } else { "no closed form" };
                println!("{}\t{}\t{closed}\t{}", e.name, e.description, e.note);
            }
            return Ok(0);
        }
        Command::Validate { scenario } => {
            let s = harness::load_scenario(scenario).map_err(invalid)?;
            println!("{}", serde_json::to_string_pretty(&s).expect("scenario serializes"));
            return Ok(0);
        }
        _ => {}
    }
    let mut scenario = build_scenario(&cli.command).map_err(invalid)?;
    if let Some(tol) = cli.tol {
        scenario.solver.tol = tol;
    }
    if let Some(f) = cli.format {
        scenario.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(dir) = &cli.out {
        scenario.output.dir = Some(dir.display().to_string());
    }
    scenario.validate().map_err(invalid)?;
    let bundle = harness::run_scenario(&scenario).map_err(invalid)?;
    match &scenario.output.dir {
        Some(dir) => {
            let files = harness::emit_report(&bundle, dir, scenario.output.format).map_err(invalid)?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        None => match scenario.output.format {
            OutputFormat::Json => print!("{}", harness::render_json(&bundle).map_err(invalid)?),
            OutputFormat::Csv => {
                for (name, text) in harness::render_csv(&bundle).map_err(invalid)? {
                    println!("# {name}.csv");
                    print!("{text}");
                }
            }
        },
    }
    summary(&bundle);
    Ok(if bundle.has_failures() { EXIT_FAILURE } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
