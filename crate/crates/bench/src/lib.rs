//! Problem generation, file formats, experiment runner and command-line
//! front end for the `conic-dual-core` solvers.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod generator;
pub mod problem_file;
pub mod report;
pub mod trace_csv;
