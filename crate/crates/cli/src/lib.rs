//! Deterministic scenario runner binding geometry, flow, diagnostics and
//! rescaling into reproducible experiments with machine-readable reports.

pub mod bundle;
pub mod config;
pub mod report;
pub mod runner;

pub use config::ScenarioConfig;
pub use report::emit_report;
pub use runner::{run_scenario, Report};
