//! Command line, run configuration and file formats.
//!
//! Exit status is 0 on success, [`EXIT_USAGE`] for bad invocations (unknown
//! flags, missing or empty inputs, invalid settings) and [`EXIT_RUNTIME`]
//! for failures while processing valid input. Every failure prints exactly
//! one line to stderr, and output files are only ever replaced whole.

mod cli;
pub mod config;
pub mod csv;

pub use cli::{run_cli, Cli};
pub use config::RunConfig;

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Writes `contents` to a temporary file beside `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
