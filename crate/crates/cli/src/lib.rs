//! Command implementations behind the `curlra` binary. Each command returns
//! a text report; timing goes on separate `time:` lines so that the rest of
//! a report is byte-identical across runs with the same arguments.

pub mod commands;
pub mod matrix_file;

pub use commands::{Outcome, Source};
