//! Command-line front end: problem files, checks, steering and artifacts.

pub mod artifacts;
pub mod commands;
pub mod problem;
pub mod report;
