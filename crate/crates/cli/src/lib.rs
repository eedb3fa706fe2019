//! Scenario runner behind the `stein-lab` binary.

pub mod checks;
pub mod config;
pub mod runner;
pub mod table;
