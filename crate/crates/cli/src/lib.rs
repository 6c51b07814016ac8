//! Command-line front end: configuration files, scan CSV, JSON reports and
//! the simulate, analyze, compare and full subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod report;
pub mod scan_csv;
