//! Command implementations behind the `dwell` binary, exposed as a library
//! so the scenario logic stays testable.

pub mod commands;
pub mod config;
pub mod error;
