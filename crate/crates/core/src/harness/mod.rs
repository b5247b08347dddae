//! Scenario files, the oracle catalog, experiment orchestration and
//! report output.

pub mod catalog;
pub mod report;
pub mod run;
pub mod scenario;

pub use catalog::{catalog, lookup, validate_catalog, CatalogEntry};
pub use report::{emit_report, render_csv, render_json};
pub use run::{run_scenario, run_scenario_with, ExperimentOutput, RunBundle, RunOptions};
pub use scenario::{load_scenario, parse_scenario, Experiment, ExperimentKind, OutputFormat, Scenario};
