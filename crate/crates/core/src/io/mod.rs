//! Experiment configuration, versioned JSON reports, golden files and the
//! subcommand driver behind the command-line tool.
//!
//! Configuration is INI-style text with sections `[lattice]`, `[fields]`,
//! `[run]`, `[simulate]`, `[solve]` and `[verify]`; see the README for the
//! frozen key list. Reports are canonical JSON, per-state and per-event
//! dumps are CSV.

mod config;
mod golden;
mod report;
mod run;

pub use config::{load_config, parse_config, ExperimentConfig, SimulateOptions, SolveOptions};
pub use golden::{compare, load_golden, snapshot, write_golden, GoldenFile, GoldenMismatch, GoldenValue};
pub use report::{hypotheses, HypothesisNote, Provenance, ReportEnvelope, Section, SCHEMA_VERSION};
pub use run::{run, write_trajectory_csv, Command, RunOutcome};
