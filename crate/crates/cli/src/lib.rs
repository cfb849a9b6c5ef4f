//! Command-line front end for `karcher-core`: problem files, the scheme
//! drivers and the randomized verification harness.

pub mod commands;
pub mod error;
pub mod json;
pub mod problem;
pub mod verify;

pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFICATION};
pub use karcher_core::random::random_spd;
pub use problem::ProblemFile;
