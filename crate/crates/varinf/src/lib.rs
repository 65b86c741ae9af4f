//! Command-line driver, configuration files, CSV/JSON output and the Monte
//! Carlo verification harness for `varinf-core`.

pub mod cli;
pub mod config;
pub mod output;
pub mod report;
pub mod verify;

pub use cli::dispatch;
