//! Command-line runner for the `seqst_core` protocols.
//!
//! Every run writes a JSON (or CSV) report that carries the resolved config, the
//! library version, the estimates, and the exact values they estimate.

pub mod args;
pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, ZooCommand};
use config::{Format, ProtocolKind};

pub use config::ExperimentConfig;
pub use report::Report;
pub use runner::run;
pub use sweep::{sweep, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SIZE_LIMIT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] seqst_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(seqst_core::Error::SizeLimitExceeded { .. }) => EXIT_SIZE_LIMIT,
            CliError::Config(_) | CliError::Core(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ZooEntry {
    name: &'static str,
    params: &'static str,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve(None)?;
            let report = run(&cfg)?;
            let text = match cfg.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(&text, cfg.out.as_deref())
        }
        Command::Validate(args) => {
            let cfg = args.resolve(Some(ProtocolKind::Validate))?;
            let report = run(&cfg)?;
            emit(&report.to_json(), cfg.out.as_deref())
        }
        Command::Sweep {
            experiment,
            axis,
            values,
        } => {
            let mut cfg = experiment.resolve(None)?;
            // sweeps default to a table
            if experiment.format.is_none() {
                cfg.format = Format::Csv;
            }
            let rows = sweep(&cfg, &axis, &values)?;
            let text = match cfg.format {
                Format::Csv => sweep::rows_to_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
            };
            emit(&text, cfg.out.as_deref())
        }
        Command::Zoo {
            command: ZooCommand::List { format },
        } => {
            let entries: Vec<ZooEntry> = seqst_core::channels::zoo_names()
                .iter()
                .map(|&(name, params)| ZooEntry { name, params })
                .collect();
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&entries).expect("zoo serializes") + "\n",
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for e in &entries {
                        w.serialize(e).expect("in-memory write");
                    }
                    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
                }
            };
            emit(&text, None)
        }
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
