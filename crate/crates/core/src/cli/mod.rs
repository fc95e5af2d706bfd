//! Command-line front end: configuration, reports and file formats.

pub mod config;
pub mod io;
pub mod report;
pub mod run;

pub use config::RunConfig;
pub use run::{run, Command, RunOutput};
