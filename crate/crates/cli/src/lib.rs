//! The `blu` command line: a declaration language and subcommands over the
//! blueprint library.

pub mod commands;
pub mod dsl;
pub mod prelude;
pub mod report;
pub mod resolve;

pub use commands::{run, Outcome};
