//! Command-line front end: configuration documents, run plans and artifacts.
//!
//! Exit codes: 0 success, 2 configuration error, 3 unsupported regime,
//! 4 sweep failure, 5 numerical failure, 6 I/O error.

pub mod config;
pub mod error;
pub mod plan;
pub mod run;

pub use error::{exit, CliError, CliResult};
pub use plan::{parse_config, plan_from_value, Command, Emit, Payload, RunPlan};
pub use run::{execute, ExecOptions, Outcome};
