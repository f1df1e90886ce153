//! Command-line driver for the flow: configuration, runs with on-disk
//! artifacts, verification suites, and plots.

pub mod commands;
pub mod config;
pub mod plot;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{cmd_run_file, cmd_verify, EXIT_OK, EXIT_USAGE};
use crate::suites::Suite;

pub const THREADS_ENV: &str = "WARPFLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "warpflow", version, about = "Inverse curvature flow of star-shaped graphs in warped ambients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a flow from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite: symmetric, axisym-k1, axisym-k2, identities, symfunc.
    Verify {
        suite: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot a record CSV as a four-panel SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Caps the global worker pool from the environment. Unset means rayon's default.
pub fn configure_threads(value: Option<&str>) -> Result<(), String> {
    let Some(raw) = value else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer (got '{raw}')"))?;
    // a pool may already exist when called twice in one process; the first cap wins
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match cli.command {
        Command::Run { config, out } => match cmd_run_file(&config, &out) {
            Ok(summary) => {
                if let Some(dump) = &summary.abort_state {
                    eprintln!("flow aborted; state dumped to {}", dump.display());
                } else if summary.exit_code != EXIT_OK {
                    eprintln!("flow aborted before any state was available");
                } else {
                    println!("record written to {}", summary.record_path.display());
                }
                println!("manifest: {}", summary.manifest_path.display());
                summary.exit_code
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Verify { suite, out } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return EXIT_USAGE;
                }
            };
            match cmd_verify(suite, &out) {
                Ok((code, report, path)) => {
                    for e in &report.entries {
                        println!("{} {}", if e.passed { "pass" } else { "FAIL" }, e.id);
                    }
                    println!("report: {}", path.display());
                    code
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::Plot { csv, out } => match plot::cmd_plot(&csv, &out) {
            Ok(()) => {
                println!("plot written to {}", out.display());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
    }
}
