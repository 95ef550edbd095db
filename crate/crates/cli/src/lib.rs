//! Config parsing, sweeps and table output behind the `casimir` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{emit_config, parse_config, Family, Format, RunConfig};
pub use error::{CliError, ErrorKind};
pub use run::{run, Report, Table};
