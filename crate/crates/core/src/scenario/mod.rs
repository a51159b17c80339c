//! Scenario configuration, runners, canned demos and output writers.

pub mod config;
pub mod demos;
pub mod io;
pub mod runner;

pub use config::{parse_config, ScenarioConfig};
pub use io::Summary;
pub use runner::{run_scenario, RunResult};
