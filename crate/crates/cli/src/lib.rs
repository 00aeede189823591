//! Batch front end for the `relclock` simulations: configuration
//! resolution, the `joint-phase`, `conditional`, `decohere` and `verify`
//! commands, and deterministic CSV/JSON output.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod states;

pub use error::{CliError, CliResult};
