//! Command-line pipelines with their file formats and JSON report.

mod config;
mod report;
mod run;
mod source;

pub use config::{Command, RunConfig, THREADS_ENV};
pub use report::*;
pub use run::{
    kernel_s_grid, run, run_and_write, run_with_threads, BERG_DIMENSIONS, EXIT_ERROR, EXIT_FAILS, EXIT_INCONCLUSIVE,
    EXIT_OK, T33_DIRECTIONS, T33_T_VALUES,
};
pub use source::{
    parse_field_source, read_field_csv, read_field_csv_path, write_field_csv, write_field_csv_path, Family,
    FieldSource, LoadedField, NODE_TOL,
};
