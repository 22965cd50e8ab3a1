//! Library surface of the CLI, split out so integration tests can drive
//! the commands without spawning processes.

pub mod commands;
pub mod config;
pub mod output;
