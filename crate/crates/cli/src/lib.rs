//! Library surface of the pairgen command-line tool. The binary in
//! `main.rs` is a thin argument-parsing wrapper around [`commands`] so the
//! integration tests drive exactly the code paths the executable runs.

pub mod commands;
pub mod config;
pub mod output;
pub mod runner;

pub use commands::{cmd_simulate, cmd_sweep_pump, cmd_validate, CliError};
