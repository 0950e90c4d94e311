//! Command-line harness: TOML run configuration, experiment dispatch and
//! on-disk artifacts.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{emit, parse_config, RunConfig};
pub use run::{list_experiments, load_config, run, run_dir, RunOutcome};
