//! Tooling around the `relpos` estimator: canonical file formats, log
//! replay, relative-distance metrics and parameter sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod metrics;
pub mod replay;
pub mod sweep;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
pub use formats::{EstimateTimeline, EventLog};
pub use replay::{run_log, run_replay, simulate, RunOutput};
pub use sweep::{run_sweep, SweepAxis, SweepRow, SweepSpec};
