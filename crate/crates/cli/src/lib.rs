//! Command-line pipeline around `prokwo-core`: transcript and survey file
//! formats, stage orchestration, CSV/SVG outputs and run manifests.

pub mod check;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod outputs;
pub mod pipeline;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{execute, Summary};
pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, EXIT_DATA, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE};

/// Run the program on `args` (including the program name), writing
/// diagnostics to `stderr` and results to `stdout`. Returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let result = RunConfig::from_options(cli.command, &cli.options).and_then(|config| execute(cli.command, &config));
    match result {
        Ok(summary) => {
            for path in &summary.written {
                let _ = writeln!(stdout, "wrote {}", path.display());
            }
            let mut failed = 0;
            for c in &summary.checks {
                let _ = writeln!(
                    stdout,
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                let _ = writeln!(stderr, "error: {failed} qualitative check(s) failed");
                return EXIT_DATA;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
