//! Command-line front end of the adaptive flux reconstruction solver:
//! configuration (flags and TOML files), the subcommands, and the output
//! formats (CSV, legacy VTK, NDJSON).

pub mod commands;
pub mod config;
pub mod output;
