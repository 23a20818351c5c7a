//! Worked scenarios, their TOML configuration and CSV/JSON reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigError, CustomConfig, CustomFrame, Format, GradingSpec, PlanSpec, ScenarioConfig, ScenarioKind, SourceSpec};
pub use report::{emit_report, parse_report, render, Report, ReportError, ReportRow, RowKind};
pub use run::{run, run_custom, run_exf1, run_exf2, run_runo};
