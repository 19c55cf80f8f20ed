//! File formats and subcommands of the `rwharm` command-line tool.

pub mod commands;
pub mod io;
