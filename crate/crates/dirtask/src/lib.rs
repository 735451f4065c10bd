//! Std companion to `dirtask-core`: file formats, the HTTP completion
//! backend, the experiment runner, report writers and the CLI.

pub mod backend;
pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod runner;
pub mod store;

pub use error::{Error, Result};
