//! Scenario configuration, field export and reproducibility plumbing.
//!
//! Scenarios are JSON with a strict schema: unknown keys are rejected and
//! every invariant violation is reported, not just the first. Lengths are
//! metres; stress-valued keys accept either a `_Pa` or a `_MPa` suffix
//! (exactly one), converted to SI once at load. The creep coefficient's
//! `_MPa` form is MPa^-n s^-1 and converts by (1e-6)^n.

mod csv;
mod scenario;
mod vtk;

pub use csv::{export_envelope, export_trace, export_yield_surface};
pub use scenario::{
    load_scenario, load_sweep_config, save_scenario, scenario_from_json, scenario_to_json,
    CohesionSweepConfig, FrictionSweepConfig, MarineSweepConfig, OutputConfig, Scenario,
};
pub use vtk::{export_snapshot, read_snapshot, Snapshot};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("malformed snapshot file: {0}")]
    Snapshot(String),
}
