//! Experiment orchestration: configuration, replicated runs on a worker
//! pool, and CSV/PGM outputs.

mod config;
mod output;
mod runs;

pub use config::{ExperimentConfig, ExperimentKind};
pub use output::{Reference, Report, ResultRow, Table};
pub use runs::{
    render_file_name, replicate_seed, run_blocking_study, run_certificate_audit, run_crossing_scan, run_experiment,
    run_extremes_study, run_gumbel_study, run_render, run_sample, run_slice3d_study, run_window_scan,
};
