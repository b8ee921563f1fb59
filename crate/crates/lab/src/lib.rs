//! File formats, experiment drivers and the `oldroyd` command line on top of
//! `oldroyd-core`.
//!
//! * [`config`]: JSON run configurations.
//! * [`snapshot`]: field snapshots (JSON header line, little-endian samples).
//! * [`report`]: CSV tables and JSON summaries.
//! * [`manifest`]: run directories with hashed outputs.
//! * [`ensemble`]: parallel ensemble experiments.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod manifest;
pub mod report;
pub mod snapshot;

pub use error::{exit, LabError};
