//! File formats, reports and commands behind the `webgeom` binary.

pub mod commands;
pub mod files;
pub mod report;

pub use commands::{
    cmd_check, cmd_invariants, cmd_solve1, cmd_symdim, error_exit_code, verdict_exit_code,
    CliError, Outcome, Solve1Options,
};
pub use files::{parse_map, parse_system, render_system, FileError};
pub use report::Report;
