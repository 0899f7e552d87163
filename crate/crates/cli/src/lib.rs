//! Document format, reports and command-line front end for
//! [`orthoscalar_core`].

pub mod commands;
pub mod document;
pub mod report;

pub use commands::{run, Cli, Command, RunOutput};
pub use document::{parse, serialize, Document, DocumentError, FORMAT_VERSION};
pub use report::{Outcome, Report};
