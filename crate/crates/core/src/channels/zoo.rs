use serde::{Deserialize, Serialize};

use super::KrausChannel;
use crate::error::{param_err, Error, Result};
use crate::pauli::{pauli_matrix, PauliLabel};
use crate::quantum::{gates, Operator, C64, ONE, ZERO};

/// Row-major complex matrix as `[re, im]` pairs.
pub type ComplexMatrix = Vec<Vec<[f64; 2]>>;

/// Parameters accepted by [`channel_zoo`]. Unused fields are ignored by channels
/// that do not need them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZooParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Named gate (`h`, `s`, `cnot`, `cz`, `swap`) or a Pauli label such as `XZ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexMatrix>,
    /// Components of `compose` (applied in order) and `tensor` (leading qubits first).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<ChannelSpec>>,
}

/// Serializable channel description: a zoo entry or an explicit Kraus set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Named {
        name: String,
        #[serde(default)]
        params: ZooParams,
    },
    Explicit {
        kraus: Vec<ComplexMatrix>,
    },
}

impl ChannelSpec {
    pub fn named(name: &str, params: ZooParams) -> Self {
        ChannelSpec::Named {
            name: name.to_string(),
            params,
        }
    }

    pub fn from_channel(ch: &KrausChannel) -> Self {
        ChannelSpec::Explicit {
            kraus: ch.kraus_ops().iter().map(matrix_to_pairs).collect(),
        }
    }

    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Named { name, params } => channel_zoo(name, params),
            ChannelSpec::Explicit { kraus } => {
                let ops = kraus.iter().map(pairs_to_matrix).collect::<Result<Vec<_>>>()?;
                KrausChannel::new(ops)
            }
        }
    }
}

pub(crate) fn matrix_to_pairs(op: &Operator) -> ComplexMatrix {
    (0..op.dim())
        .map(|i| {
            (0..op.dim())
                .map(|j| {
                    let z = op.get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

pub(crate) fn pairs_to_matrix(m: &ComplexMatrix) -> Result<Operator> {
    let rows: Vec<Vec<C64>> = m
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    Operator::from_rows(&rows)
}

const NAMES: &[(&str, &str)] = &[
    ("identity", "n"),
    ("unitary", "gate | matrix"),
    ("bit_flip", "p in [0,1], n (per qubit)"),
    ("phase_flip", "p in [0,1], n (per qubit)"),
    ("bit_phase_flip", "p in [0,1], n (per qubit)"),
    ("depolarizing", "p in [0, 4^n/(4^n-1)], n"),
    ("amplitude_damping", "gamma in [0,1], n (per qubit)"),
    ("compose", "channels (applied in order)"),
    ("tensor", "channels (leading qubits first)"),
];

/// Names and parameter summaries of every zoo channel.
pub fn zoo_names() -> &'static [(&'static str, &'static str)] {
    NAMES
}

/// One representative parameterization of every zoo entry on `n` qubits.
pub fn zoo_instances(n: usize) -> Vec<ChannelSpec> {
    let with = |p: Option<f64>, gamma: Option<f64>| ZooParams {
        n: Some(n),
        p,
        gamma,
        ..ZooParams::default()
    };
    let gate = match n {
        1 => "h".to_string(),
        2 => "cnot".to_string(),
        _ => format!("XY{}", "Z".repeat(n - 2)),
    };
    let mut specs = vec![
        ChannelSpec::named("identity", with(None, None)),
        ChannelSpec::named(
            "unitary",
            ZooParams {
                gate: Some(gate),
                ..ZooParams::default()
            },
        ),
        ChannelSpec::named("bit_flip", with(Some(0.3), None)),
        ChannelSpec::named("phase_flip", with(Some(0.3), None)),
        ChannelSpec::named("bit_phase_flip", with(Some(0.2), None)),
        ChannelSpec::named("depolarizing", with(Some(0.2), None)),
        ChannelSpec::named("amplitude_damping", with(None, Some(0.3))),
        ChannelSpec::named(
            "compose",
            ZooParams {
                channels: Some(vec![
                    ChannelSpec::named("amplitude_damping", with(None, Some(0.3))),
                    ChannelSpec::named("phase_flip", with(Some(0.2), None)),
                ]),
                ..ZooParams::default()
            },
        ),
    ];
    if n >= 2 {
        let one = |name: &str, p: Option<f64>, gamma: Option<f64>| {
            ChannelSpec::named(name, ZooParams { p, gamma, ..ZooParams::default() })
        };
        let mut parts = vec![one("bit_flip", Some(0.25), None)];
        parts.extend((1..n).map(|_| one("amplitude_damping", None, Some(0.4))));
        specs.push(ChannelSpec::named(
            "tensor",
            ZooParams {
                channels: Some(parts),
                ..ZooParams::default()
            },
        ));
    }
    specs
}

fn probability(name: &str, value: Option<f64>, max: f64) -> Result<f64> {
    let v = value.ok_or_else(|| param_err(name, "missing"))?;
    if !(0.0..=max).contains(&v) {
        return Err(param_err(name, format!("{v} not in [0, {max}]")));
    }
    Ok(v)
}

fn qubits(params: &ZooParams) -> Result<usize> {
    match params.n.unwrap_or(1) {
        0 => Err(param_err("n", "need at least one qubit")),
        n if n > 8 => Err(param_err("n", format!("{n} qubits exceeds dense limit 8"))),
        n => Ok(n),
    }
}

fn scaled(op: Operator, weight: f64) -> Operator {
    op.scale(C64::new(weight.sqrt(), 0.0))
}

fn pauli_flip(p: f64, flip: Operator) -> Result<KrausChannel> {
    KrausChannel::new(vec![scaled(Operator::identity(2), 1.0 - p), scaled(flip, p)])
}

fn named_gate(gate: &str) -> Result<Operator> {
    let cx = |rows: &[&[f64]]| Operator::from_real_rows(rows);
    match gate.to_ascii_lowercase().as_str() {
        "h" | "hadamard" => Ok(gates::hadamard()),
        "s" | "phase" => Ok(gates::phase()),
        "cnot" | "cx" => cx(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]),
        "cz" => Ok(Operator::diagonal(&[ONE, ONE, ONE, -ONE])),
        "swap" => cx(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]),
        _ => gate
            .parse::<PauliLabel>()
            .map(|l| pauli_matrix(&l))
            .map_err(|_| param_err("gate", format!("unknown gate `{gate}`"))),
    }
}

fn sub_channels(params: &ZooParams) -> Result<Vec<KrausChannel>> {
    let specs = params
        .channels
        .as_ref()
        .filter(|c| !c.is_empty())
        .ok_or_else(|| param_err("channels", "need at least one component"))?;
    specs.iter().map(ChannelSpec::build).collect()
}

/// Builds a named channel. Hyphens and underscores are interchangeable in names.
pub fn channel_zoo(name: &str, params: &ZooParams) -> Result<KrausChannel> {
    let key = name.trim().to_ascii_lowercase().replace('-', "_");
    match key.as_str() {
        "identity" => Ok(KrausChannel::identity(qubits(params)?)),
        "unitary" => {
            let u = match (&params.gate, &params.matrix) {
                (Some(g), None) => named_gate(g)?,
                (None, Some(m)) => pairs_to_matrix(m)?,
                _ => return Err(param_err("gate", "give exactly one of `gate` or `matrix`")),
            };
            KrausChannel::unitary(u).map_err(|e| param_err("matrix", e.to_string()))
        }
        "bit_flip" | "phase_flip" | "bit_phase_flip" => {
            let p = probability("p", params.p, 1.0)?;
            let flip = match key.as_str() {
                "bit_flip" => gates::x(),
                "phase_flip" => gates::z(),
                _ => gates::y(),
            };
            Ok(pauli_flip(p, flip)?.tensor_power(qubits(params)?))
        }
        "depolarizing" => {
            let n = qubits(params)?;
            let size = 1usize << (2 * n);
            let weight = size as f64;
            let p = probability("p", params.p, weight / (weight - 1.0))?;
            // rho -> (1 - p) rho + p I/D, written over the full Pauli basis
            let mut ops = Vec::with_capacity(size);
            let identity_weight = (1.0 - p * (weight - 1.0) / weight).max(0.0);
            for m in 0..size {
                let label = PauliLabel::from_index(n, m)?;
                let w = if m == 0 { identity_weight } else { p / weight };
                if w > 0.0 || m == 0 {
                    ops.push(scaled(pauli_matrix(&label), w));
                }
            }
            KrausChannel::new(ops)
        }
        "amplitude_damping" => {
            let g = probability("gamma", params.gamma, 1.0)?;
            let k0 = Operator::diagonal(&[ONE, C64::new((1.0 - g).sqrt(), 0.0)]);
            let k1 = Operator::from_rows(&[vec![ZERO, C64::new(g.sqrt(), 0.0)], vec![ZERO, ZERO]])?;
            Ok(KrausChannel::new(vec![k0, k1])?.tensor_power(qubits(params)?))
        }
        "compose" => {
            let parts = sub_channels(params)?;
            let mut iter = parts.into_iter();
            let first = iter.next().expect("non-empty");
            iter.try_fold(first, |acc, next| acc.then(&next))
        }
        "tensor" => {
            let parts = sub_channels(params)?;
            let mut iter = parts.into_iter();
            let first = iter.next().expect("non-empty");
            Ok(iter.fold(first, |acc, next| acc.tensor(&next)))
        }
        _ => Err(Error::UnknownChannel(name.to_string())),
    }
}
