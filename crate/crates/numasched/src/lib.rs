//! Command-line front end, trace files and report rendering for
//! [`numasched_core`].

pub mod cli;
pub mod report;
pub mod runner;
pub mod trace;

pub use cli::{Cli, CliError, RunConfig};
pub use report::{render_report, OutputFormat};
pub use runner::{run_parallel, verify_optimality};
pub use trace::{parse_trace, read_trace_file, write_trace, write_trace_file, TraceError};
