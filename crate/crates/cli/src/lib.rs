//! Library surface of the workbench CLI, exposed so the commands can be
//! driven directly from integration tests.

pub mod commands;
pub mod config;
pub mod report;
