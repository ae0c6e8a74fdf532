//! Command-line front end of `splinetraj`: JSON problem and world files,
//! CSV outputs and the benchmark harness.
//!
//! Exit codes: 0 on success, 1 for invalid input (unreadable, malformed or
//! inconsistent files and flags), 2 for numerical failures. Outputs default
//! to the directory named by `SPLINETRAJ_OUT_DIR`, or the working directory.

pub mod bench;
pub mod commands;
pub mod conditioning;
pub mod error;
pub mod formats;
pub mod instances;
pub mod output;

pub use error::{CliError, CliResult};
