//! Command-line front end of `clustvar-core`: CSV ingestion, JSON/CSV/Newick/SVG
//! outputs and the `clustvar` binary.

pub mod cli;
pub mod error;
pub mod export;
pub mod io;
pub mod report;
pub mod svg;

pub use error::{CliError, CliResult, Failure};
pub use io::{load_csv, read_csv, write_csv, ColumnType, LoadOptions, QualiColumns, Schema};
