//! Files, run directories, reports and the `spdcl` command-line tool built on
//! top of [`spdcl_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod fsutil;
pub mod report;
pub mod rundir;
pub mod synth;

pub use error::{Error, Result};
pub use rundir::{train_run, RunLayout, RunMode};
