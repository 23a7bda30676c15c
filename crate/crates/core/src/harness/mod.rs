//! Configuration, sweep execution and persistence.
//!
//! A run expands the configured grid, evaluates points in order and appends
//! each point's rows to a tidy CSV (one observable per row) as soon as they
//! are done. A JSON sidecar echoes the config and lists completed points; it
//! carries `partial = true` until the run finishes, which lets
//! [`resume_or_extend`] pick up interrupted or extended grids.

mod config;
mod engine;
mod run;
mod table;

pub use config::{Engine, Experiment, ExperimentConfig, GridSpec, OutputSpec, RunControls, WORKERS_ENV};
pub use engine::{default_schedule, evaluate_point, grid_points, FrameCache, PointSpec};
pub use run::{read_metadata, resume_or_extend, run_experiment, RunMetadata, RunReport, CODE_VERSION};
pub use table::{append_rows, SweepRow, SweepTable, CSV_HEADER};
