//! Reference oracles and the acceptance suites built on them.

pub mod oracles;
pub mod suites;

pub use suites::{run_suite, Suite, SuiteParams};

#[cfg(test)]
mod properties;
