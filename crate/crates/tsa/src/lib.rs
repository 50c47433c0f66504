//! File formats and the `tsa` command line on top of [`tsa_core`].

pub mod cli;
pub mod format;

pub use cli::run_cli;
