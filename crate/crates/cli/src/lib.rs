//! Library side of the command-line front end: output formats, sweep
//! parsing and evaluation, the parallel simulation driver, and the
//! cross-engine validation suite.

pub mod output;
pub mod sweep;
pub mod validation;
pub mod workers;
