//! File formats and subcommands of the `delta-stab` binary.

pub mod commands;
pub mod files;
pub mod scanfile;

pub use commands::{run, Cli};

/// Worker count from `DELTA_STAB_THREADS`; `None` means automatic.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, String> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(format!("DELTA_STAB_THREADS must be a nonnegative integer, got {v:?}")),
        },
    }
}
