//! `gazeaudit` command line: batch subcommands over a dataset manifest and the local
//! annotation service.

mod args;
mod commands;
pub mod service;

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;
use gazeaudit_core::io::{read_telemetry_csv, Annotations, VideoEntry};

pub use args::{Cli, Command};
pub use service::{router, serve, AppState, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an unknown video id; exit code 2.
    Usage(String),
    Core(gazeaudit_core::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io(_) => EXIT_DOMAIN,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gazeaudit_core::Error> for CliError {
    fn from(e: gazeaudit_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Frame count of a video: declared, else one past the last telemetry frame, else
/// taken from an existing annotation document.
pub fn video_num_frames(v: &VideoEntry) -> CliResult<u64> {
    if let Some(n) = v.num_frames {
        return Ok(n);
    }
    if let Some(p) = &v.telemetry {
        if let Some(last) = read_telemetry_csv(p)?.last() {
            return Ok(last.frame + 1);
        }
    }
    if let Some(p) = v.annotations.as_deref().filter(|p| p.is_file()) {
        return Ok(Annotations::read(p)?.num_frames);
    }
    Err(CliError::Io(format!("video {}: cannot determine the frame count", v.id)))
}

/// Existing annotation document at `path`, or an empty one.
pub(crate) fn load_or_new(path: &Path, id: &str, num_frames: u64) -> CliResult<Annotations> {
    if !path.is_file() {
        return Ok(Annotations::new(id, num_frames));
    }
    let a = Annotations::read(path)?;
    if a.video_id != id || a.num_frames != num_frames {
        return Err(CliError::Io(format!(
            "{}: document is for video {} with {} frames, expected {id} with {num_frames}",
            path.display(),
            a.video_id,
            a.num_frames
        )));
    }
    Ok(a)
}
