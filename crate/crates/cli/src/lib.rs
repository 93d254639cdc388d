//! Experiment campaign runner and file formats for the schedule toolkit
//! binary. The library half exists so integration tests can drive
//! campaigns in-process; `main.rs` is a thin argument-parsing shell.

pub mod campaign;
pub mod probfile;
