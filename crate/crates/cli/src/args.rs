use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_basis_arg, parse_channel_arg, parse_state_arg, ExperimentConfig, Format, IndexSpec, ProtocolKind,
    TargetMode,
};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "seqst", version, about = "Selective quantum state and process tomography workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its report.
    Run(ExperimentArgs),
    /// Repeat an experiment over a list of values for one numeric field.
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Field to vary: epsilon, delta, seed, n_states, workers, a, b, k, or a channel parameter (p, gamma, n).
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Check hermiticity, trace preservation and complete positivity of a channel.
    Validate(ExperimentArgs),
    /// Inspect the built-in channel zoo.
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ZooCommand {
    /// List channel names and their parameters.
    List {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

/// Flags shared by every experiment; each overrides the matching field of `--config`.
#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolKind>,
    /// JSON, or `name:key=value,...` such as `depolarizing:p=0.2`.
    #[arg(long)]
    pub channel: Option<String>,
    /// JSON, or `name:key=value,...` such as `plus:n=2`.
    #[arg(long)]
    pub state: Option<String>,
    /// `computational`, `random`, per-qubit axes such as `XZ`, or JSON.
    #[arg(long)]
    pub basis: Option<String>,
    /// Row index: an integer or a Pauli label.
    #[arg(long)]
    pub a: Option<String>,
    /// Column index: an integer or a Pauli label.
    #[arg(long)]
    pub b: Option<String>,
    /// Diagonal index for dcqd-diag.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long, value_enum)]
    pub target: Option<TargetMode>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n_states: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl ExperimentArgs {
    /// Loads `--config` if given, then applies the flag overrides.
    pub fn resolve(&self, forced: Option<ProtocolKind>) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match (&self.config, forced.or(self.protocol)) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(p)) => ExperimentConfig::new(p),
            (None, None) => return Err(CliError::Config("give --protocol or --config".into())),
        };
        if let Some(p) = forced.or(self.protocol) {
            cfg.protocol = p;
        }
        if let Some(text) = &self.channel {
            cfg.channel = Some(parse_channel_arg(text)?);
        }
        if let Some(text) = &self.state {
            cfg.state = Some(parse_state_arg(text)?);
        }
        if let Some(text) = &self.basis {
            cfg.basis = Some(parse_basis_arg(text)?);
        }
        if let Some(a) = &self.a {
            cfg.a = Some(IndexSpec::parse(a));
        }
        if let Some(b) = &self.b {
            cfg.b = Some(IndexSpec::parse(b));
        }
        if let Some(k) = &self.k {
            cfg.k = Some(IndexSpec::parse(k));
        }
        cfg.target = self.target.or(cfg.target);
        cfg.epsilon = self.epsilon.unwrap_or(cfg.epsilon);
        cfg.delta = self.delta.unwrap_or(cfg.delta);
        cfg.n_states = self.n_states.or(cfg.n_states);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.workers = self.workers.unwrap_or(cfg.workers);
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.format = self.format.unwrap_or(cfg.format);
        Ok(cfg)
    }
}
