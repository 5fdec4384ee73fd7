//! Configuration-driven experiments over the `fraclap` library.
//!
//! A run parses a TOML configuration ([`config`]), evaluates one experiment
//! ([`experiments::run`]) and writes a deterministic CSV table plus a JSON
//! report ([`report`]).

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{run, RunError};
pub use report::{write_report, Assertion, Cell, ExperimentReport, Format, Relation};
