//! Timing harness for run time assurance filters and inspection policies.
//!
//! Generates seeded safe / not-safe state suites, runs the controller →
//! filter pipeline with per-call monotonic timing (first call separated),
//! and summarizes samples as IQM / mean / std / min / median / MOET tables.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod stats;
pub mod suite;
pub mod verify;

pub use config::{BenchConfig, ControllerKind, OutputFormat, PolicySource};
pub use error::BenchError;
pub use report::{read_json_report, write_report};
pub use run::{run_cases, run_config, RunOutput, TimingSample};
pub use stats::{compute_stats, Stats, TimingReport};
pub use suite::{generate_states, Suite, SuiteParams, TestCase};
