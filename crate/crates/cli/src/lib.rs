//! Command-line front end: config parsing, subcommands and output formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{cmd_check, cmd_mms, cmd_run, cmd_sweep, CheckArgs};
pub use config::{ConfigError, ConfigFile, MmsSettings, RunSettings, SweepSettings};
