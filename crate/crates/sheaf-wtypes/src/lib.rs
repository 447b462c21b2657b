//! File formats, seeded random instances, JSON reports and the commands
//! behind the `sheaf-wtypes` binary.

pub mod io;
pub mod random;
pub mod report;
pub mod run;

pub use run::{cmd_compute, cmd_demo, cmd_validate, cmd_verify, Config, Fault, Outcome};
