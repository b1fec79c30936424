use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use seqst_core::channels::ComplexMatrix;
use seqst_core::ChannelSpec;

use crate::CliError;

/// Which experiment to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    SeqstState,
    StandardQst,
    Aapt,
    DcqdDiag,
    SeqstQpt,
    Seqpt,
    Validate,
}

impl ProtocolKind {
    pub fn needs_channel(self) -> bool {
        !matches!(self, ProtocolKind::SeqstState | ProtocolKind::StandardQst)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Which coefficients to estimate when `a`/`b` are not given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    Pair,
    AllDiagonal,
    All,
}

/// A coefficient index: a plain integer or a Pauli label such as `"XZ"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSpec {
    Int(usize),
    Label(String),
}

impl IndexSpec {
    pub fn parse(text: &str) -> Self {
        match text.parse() {
            Ok(i) => IndexSpec::Int(i),
            Err(_) => IndexSpec::Label(text.to_string()),
        }
    }
}

/// An input state for the state protocols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `zero`, `one`, `plus`, `minus`, `plus_i`, `minus_i`, `ghz`, `mixed` or `random`.
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Pure {
        amplitudes: Vec<[f64; 2]>,
    },
    Density {
        matrix: ComplexMatrix,
    },
}

/// The basis whose matrix elements the state protocols estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    /// `computational`, a string of per-qubit axes such as `"XZ"`, or `random`.
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Unitary {
        unitary: ComplexMatrix,
    },
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.05
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<IndexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<IndexSpec>,
    /// Single diagonal index for `dcqd-diag`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<IndexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetMode>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_states: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(protocol: ProtocolKind) -> Self {
        Self {
            protocol,
            channel: None,
            state: None,
            basis: None,
            a: None,
            b: None,
            k: None,
            target: None,
            epsilon: default_epsilon(),
            delta: default_delta(),
            n_states: None,
            seed: 0,
            workers: default_workers(),
            out: None,
            format: Format::Json,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses a JSON value when the text looks like one, a bare number otherwise,
/// and falls back to a string.
fn scalar(text: &str) -> Value {
    serde_json::from_str::<Value>(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Parses `name` or `name:key=value,...` into a JSON object with `name` and `params`.
fn name_with_params(text: &str, what: &str) -> Result<(String, Map<String, Value>), CliError> {
    let (name, rest) = match text.split_once(':') {
        Some((name, rest)) => (name, rest),
        None => (text, ""),
    };
    if name.is_empty() {
        return Err(CliError::Config(format!("empty {what} name")));
    }
    let mut params = Map::new();
    for pair in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value in {what} spec, got {pair:?}")))?;
        params.insert(k.trim().to_string(), scalar(v.trim()));
    }
    Ok((name.to_string(), params))
}

fn looks_like_json(text: &str) -> bool {
    matches!(text.trim_start().chars().next(), Some('{') | Some('['))
}

fn from_value<T: serde::de::DeserializeOwned>(value: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// `--channel` accepts JSON or `name:key=value,...`, e.g. `depolarizing:p=0.2`.
pub fn parse_channel_arg(text: &str) -> Result<ChannelSpec, CliError> {
    if looks_like_json(text) {
        return from_value(scalar(text), "channel");
    }
    let (name, params) = name_with_params(text, "channel")?;
    from_value(serde_json::json!({ "name": name, "params": params }), "channel")
}

/// `--state` accepts JSON or `name[:key=value,...]`, e.g. `ghz:n=3`.
pub fn parse_state_arg(text: &str) -> Result<StateSpec, CliError> {
    if looks_like_json(text) {
        return from_value(scalar(text), "state");
    }
    let (name, mut params) = name_with_params(text, "state")?;
    params.insert("name".into(), Value::String(name));
    from_value(Value::Object(params), "state")
}

/// `--basis` accepts JSON or `name[:seed=...]`.
pub fn parse_basis_arg(text: &str) -> Result<BasisSpec, CliError> {
    if looks_like_json(text) {
        return from_value(scalar(text), "basis");
    }
    let (name, mut params) = name_with_params(text, "basis")?;
    params.insert("name".into(), Value::String(name));
    from_value(Value::Object(params), "basis")
}

/// Sets a numeric field by name; used by `sweep`. Channel parameters such as
/// `p` or `gamma` are set on a named channel.
pub fn set_numeric(config: &mut ExperimentConfig, axis: &str, value: f64) -> Result<(), CliError> {
    let as_count = |v: f64| -> Result<u64, CliError> {
        if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(CliError::Config(format!("{axis} must be a non-negative integer, got {v}")))
        }
    };
    match axis {
        "epsilon" => config.epsilon = value,
        "delta" => config.delta = value,
        "seed" => config.seed = as_count(value)?,
        "n_states" => config.n_states = Some(as_count(value)? as usize),
        "workers" => config.workers = as_count(value)? as usize,
        "a" => config.a = Some(IndexSpec::Int(as_count(value)? as usize)),
        "b" => config.b = Some(IndexSpec::Int(as_count(value)? as usize)),
        "k" => config.k = Some(IndexSpec::Int(as_count(value)? as usize)),
        "p" | "gamma" | "n" => {
            let Some(ChannelSpec::Named { params, .. }) = config.channel.as_mut() else {
                return Err(CliError::Config(format!("sweep axis {axis} needs a named channel")));
            };
            match axis {
                "p" => params.p = Some(value),
                "gamma" => params.gamma = Some(value),
                _ => params.n = Some(as_count(value)? as usize),
            }
        }
        other => return Err(CliError::Config(format!("unknown sweep axis {other:?}"))),
    }
    Ok(())
}
