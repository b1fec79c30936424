use std::time::Instant;

use seqst_core::channels::{kraus_to_chi, validate_channel, ComplexMatrix};
use seqst_core::pauli::{basis_size, Pauli};
use seqst_core::qpt::{
    aapt_full_chi, dcqd_diagonal_sample, seqpt_estimate, seqpt_single_shot_plan, seqst_qpt_sample,
};
use seqst_core::quantum::{maximally_entangled_state, random_density_matrix, DensityMatrix};
use seqst_core::seqst::{seqst_sample, standard_pauli_qst_sample};
use seqst_core::{
    chernoff_plan, ChiMatrix, Error, KrausChannel, Operator, PauliLabel, PreparationBasis, PureState,
    RandomStream, ShotPlan, SizeLimits, C64,
};

use crate::config::{BasisSpec, ExperimentConfig, IndexSpec, ProtocolKind, StateSpec, TargetMode};
use crate::report::{Entry, PlanEcho, Report};
use crate::CliError;

/// Largest state register for `seqst-state` (the joint register adds one ancilla).
pub const MAX_STATE_QUBITS: usize = 6;
/// Largest state register for `standard-qst`, which measures all `4^n` Paulis.
pub const MAX_QST_QUBITS: usize = 4;

/// Stream for drawing random inputs (states, bases); sampling uses stream 0.
const SETUP_STREAM: u64 = 1;

fn to_operator(m: &ComplexMatrix) -> Result<Operator, CliError> {
    let rows: Vec<Vec<C64>> = m
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    Ok(Operator::from_rows(&rows)?)
}

fn size_check(what: &'static str, n: usize, limit: usize) -> Result<(), CliError> {
    if n > limit {
        return Err(Error::SizeLimitExceeded {
            what,
            requested: n,
            limit,
        }
        .into());
    }
    Ok(())
}

fn product_state(n: usize, amps: [C64; 2]) -> Result<PureState, CliError> {
    let one = PureState::new(amps.to_vec())?;
    Ok((1..n).fold(one.clone(), |acc, _| acc.tensor(&one)))
}

pub fn build_state(spec: &StateSpec, seed: u64) -> Result<DensityMatrix, CliError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let pure = match spec {
        StateSpec::Named { name, n, seed: own } => {
            let n = n.unwrap_or(1);
            if n == 0 {
                return Err(CliError::Config("state needs at least one qubit".into()));
            }
            size_check("state qubits", n, MAX_STATE_QUBITS)?;
            let r = C64::new(h, 0.0);
            let ih = C64::new(0.0, h);
            match name.replace('-', "_").as_str() {
                "zero" => product_state(n, [o, z])?,
                "one" => product_state(n, [z, o])?,
                "plus" => product_state(n, [r, r])?,
                "minus" => product_state(n, [r, -r])?,
                "plus_i" => product_state(n, [r, ih])?,
                "minus_i" => product_state(n, [r, -ih])?,
                "ghz" => {
                    let mut amps = vec![z; 1 << n];
                    amps[0] = r;
                    amps[(1 << n) - 1] = r;
                    PureState::new(amps)?
                }
                "bell" => maximally_entangled_state(n),
                "mixed" => return Ok(DensityMatrix::maximally_mixed(1 << n)),
                "random" => {
                    let stream = match own {
                        Some(s) => RandomStream::new(*s),
                        None => RandomStream::with_stream(seed, SETUP_STREAM).child(0),
                    };
                    return Ok(random_density_matrix(1 << n, &mut stream.rng()));
                }
                other => return Err(CliError::Config(format!("unknown state {other:?}"))),
            }
        }
        StateSpec::Pure { amplitudes } => {
            PureState::new(amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect())?
        }
        StateSpec::Density { matrix } => {
            return Ok(DensityMatrix::from_operator(to_operator(matrix)?)?);
        }
    };
    Ok(pure.projector())
}

pub fn build_basis(spec: Option<&BasisSpec>, n: usize, seed: u64) -> Result<PreparationBasis, CliError> {
    let Some(spec) = spec else {
        return Ok(PreparationBasis::computational(n));
    };
    let basis = match spec {
        BasisSpec::Named { name, seed: own } => match name.as_str() {
            "computational" => PreparationBasis::computational(n),
            "random" => {
                let stream = match own {
                    Some(s) => RandomStream::new(*s),
                    None => RandomStream::with_stream(seed, SETUP_STREAM).child(1),
                };
                PreparationBasis::random_unitary(n, &mut stream.rng())
            }
            axes => {
                let axes = axes
                    .chars()
                    .map(|c| match c.to_ascii_uppercase() {
                        'X' => Ok(Pauli::X),
                        'Y' => Ok(Pauli::Y),
                        'Z' => Ok(Pauli::Z),
                        _ => Err(CliError::Config(format!("unknown basis {name:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                PreparationBasis::pauli_eigenbasis(&axes)?
            }
        },
        BasisSpec::Unitary { unitary } => PreparationBasis::from_unitary(to_operator(unitary)?)?,
    };
    if basis.num_qubits() != n {
        return Err(CliError::Config(format!(
            "basis acts on {} qubits but the state has {n}",
            basis.num_qubits()
        )));
    }
    Ok(basis)
}

/// Resolves an index against a space of `limit` coefficients. Pauli labels are
/// accepted when `pauli_qubits` is set.
fn resolve_index(spec: &IndexSpec, limit: usize, pauli_qubits: Option<usize>, field: &str) -> Result<usize, CliError> {
    let idx = match (spec, pauli_qubits) {
        (IndexSpec::Int(i), _) => *i,
        (IndexSpec::Label(text), Some(n)) => {
            let label: PauliLabel = text.parse()?;
            if label.num_qubits() != n {
                return Err(CliError::Config(format!(
                    "{field} = {text:?} has {} letters, expected {n}",
                    label.num_qubits()
                )));
            }
            label.index()
        }
        (IndexSpec::Label(text), None) => {
            return Err(CliError::Config(format!("{field} must be an integer, got {text:?}")))
        }
    };
    if idx >= limit {
        return Err(CliError::Config(format!("{field} = {idx} out of range for {limit} coefficients")));
    }
    Ok(idx)
}

/// The `(a, b)` pairs a config asks for.
fn targets(
    config: &ExperimentConfig,
    limit: usize,
    pauli_qubits: Option<usize>,
    default: Option<TargetMode>,
) -> Result<Vec<(usize, usize)>, CliError> {
    let mode = match (config.target, &config.a, &config.b) {
        (Some(mode), _, _) => mode,
        (None, Some(_), _) | (None, _, Some(_)) => TargetMode::Pair,
        (None, None, None) => default.ok_or_else(|| {
            CliError::Config("no target: give a and b, or target = all-diagonal | all".into())
        })?,
    };
    Ok(match mode {
        TargetMode::Pair => {
            let (Some(a), Some(b)) = (&config.a, &config.b) else {
                return Err(CliError::Config("target pair needs both a and b".into()));
            };
            vec![(
                resolve_index(a, limit, pauli_qubits, "a")?,
                resolve_index(b, limit, pauli_qubits, "b")?,
            )]
        }
        TargetMode::AllDiagonal => (0..limit).map(|k| (k, k)).collect(),
        TargetMode::All => (0..limit).flat_map(|a| (0..limit).map(move |b| (a, b))).collect(),
    })
}

fn check_plan_params(config: &ExperimentConfig) -> Result<ShotPlan, CliError> {
    if config.workers == 0 {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    Ok(chernoff_plan(config.epsilon, config.delta)?)
}

fn echo(plan: &ShotPlan, seed: u64) -> PlanEcho {
    PlanEcho {
        epsilon: plan.epsilon,
        delta: plan.delta,
        m: plan.m,
        seed,
    }
}

fn label(n: usize, k: usize) -> PauliLabel {
    PauliLabel::from_index(n, k).expect("index resolved against 4^n")
}

struct Outcome {
    num_qubits: usize,
    plan: Option<PlanEcho>,
    n_states: Option<usize>,
    entries: Vec<Entry>,
    validity: Option<seqst_core::ValidityReport>,
}

/// Runs one experiment and assembles its report.
pub fn run(config: &ExperimentConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let outcome = if config.protocol.needs_channel() {
        let spec = config
            .channel
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("protocol {:?} needs a channel", config.protocol)))?;
        let ch = spec.build()?;
        run_channel(config, &ch)?
    } else {
        let spec = config
            .state
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("protocol {:?} needs a state", config.protocol)))?;
        let rho = build_state(spec, config.seed)?;
        run_state(config, &rho)?
    };
    let total_shots = outcome.entries.iter().map(|e| e.shots).sum::<u64>();
    Ok(Report {
        version: seqst_core::VERSION.to_string(),
        config: config.clone(),
        num_qubits: outcome.num_qubits,
        plan: outcome.plan,
        n_states: outcome.n_states,
        entries: outcome.entries,
        validity: outcome.validity,
        total_shots: match config.protocol {
            // one measurement in R yields every diagonal entry at once
            ProtocolKind::DcqdDiag => outcome.plan.map_or(0, |p| p.m),
            _ => total_shots,
        },
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn sampling_stream(config: &ExperimentConfig, ordinal: usize) -> RandomStream {
    RandomStream::new(config.seed).with_workers(config.workers).child(ordinal as u64)
}

fn run_state(config: &ExperimentConfig, rho: &DensityMatrix) -> Result<Outcome, CliError> {
    let n = seqst_core::quantum::qubit_count(rho.dim())
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("state dimension {} is not 2^n", rho.dim())))?;
    let plan = check_plan_params(config)?;
    match config.protocol {
        ProtocolKind::SeqstState => {
            size_check("state qubits", n, MAX_STATE_QUBITS)?;
            let basis = build_basis(config.basis.as_ref(), n, config.seed)?;
            let pairs = targets(config, 1 << n, None, None)?;
            let states: Vec<PureState> = (0..1 << n).map(|a| basis.state(a)).collect::<Result<_, _>>()?;
            let entries = pairs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let r = seqst_sample(rho, &basis, a, b, &plan, &sampling_stream(config, i))?;
                    // <psi_a| rho |psi_b> straight from the basis vectors
                    let exact = rho.matrix_element(&states[a], &states[b]);
                    Ok(Entry::new(a, b, r.estimate(), exact, 2 * r.m_shots).stderr(seqst_core::qpt::ReIm {
                        re: r.se_re,
                        im: r.se_im,
                    }))
                })
                .collect::<Result<_, CliError>>()?;
            Ok(Outcome {
                num_qubits: n,
                plan: Some(echo(&plan, config.seed)),
                n_states: None,
                entries,
                validity: None,
            })
        }
        ProtocolKind::StandardQst => {
            size_check("state qubits", n, MAX_QST_QUBITS)?;
            let wanted = targets(config, basis_size(n), Some(n), Some(TargetMode::AllDiagonal))?;
            if wanted.iter().any(|(a, b)| a != b) {
                return Err(CliError::Config("standard-qst estimates single Pauli expectations; use a = b".into()));
            }
            let stream = RandomStream::new(config.seed).with_workers(config.workers);
            let all = standard_pauli_qst_sample(rho, &plan, &stream)?;
            let entries = wanted
                .iter()
                .map(|&(k, _)| {
                    let e = &all[k];
                    Entry::new(k, k, C64::new(e.estimate, 0.0), C64::new(e.exact, 0.0), e.shots)
                        .labels(&e.label, &e.label)
                        .stderr(seqst_core::qpt::ReIm { re: e.stderr, im: 0.0 })
                })
                .collect();
            Ok(Outcome {
                num_qubits: n,
                plan: Some(echo(&plan, config.seed)),
                n_states: None,
                entries,
                validity: None,
            })
        }
        _ => unreachable!("channel protocols are dispatched separately"),
    }
}

fn chi_entry(n: usize, a: usize, b: usize, estimate: C64, exact: &ChiMatrix, shots: u64) -> Entry {
    Entry::new(a, b, estimate, exact.get(a, b), shots).labels(label(n, a), label(n, b))
}

fn run_channel(config: &ExperimentConfig, ch: &KrausChannel) -> Result<Outcome, CliError> {
    let n = ch.num_qubits();
    let limits = SizeLimits::default();
    let space = basis_size(n);
    let mut outcome = Outcome {
        num_qubits: n,
        plan: None,
        n_states: None,
        entries: Vec::new(),
        validity: None,
    };
    match config.protocol {
        ProtocolKind::Aapt => {
            let estimate = aapt_full_chi(ch, &limits)?;
            let exact = kraus_to_chi(ch);
            outcome.entries = targets(config, space, Some(n), Some(TargetMode::All))?
                .into_iter()
                .map(|(a, b)| chi_entry(n, a, b, estimate.get(a, b), &exact, 0))
                .collect();
        }
        ProtocolKind::DcqdDiag => {
            size_check("qubits for diagonal estimation", n, limits.selective_max_qubits)?;
            let plan = check_plan_params(config)?;
            let wanted: Vec<usize> = match &config.k {
                Some(k) => vec![resolve_index(k, space, Some(n), "k")?],
                None => targets(config, space, Some(n), Some(TargetMode::AllDiagonal))?
                    .into_iter()
                    .map(|(a, b)| {
                        if a == b {
                            Ok(a)
                        } else {
                            Err(CliError::Config("dcqd-diag estimates diagonal entries only; use a = b".into()))
                        }
                    })
                    .collect::<Result<_, _>>()?,
            };
            let exact = kraus_to_chi(ch);
            let stream = RandomStream::new(config.seed).with_workers(config.workers);
            let all = dcqd_diagonal_sample(ch, &plan, &stream)?;
            outcome.entries = wanted
                .into_iter()
                .map(|k| {
                    chi_entry(n, k, k, C64::new(all[k].frequency, 0.0), &exact, plan.m).stderr(
                        seqst_core::qpt::ReIm {
                            re: all[k].stderr,
                            im: 0.0,
                        },
                    )
                })
                .collect();
            outcome.plan = Some(echo(&plan, config.seed));
        }
        ProtocolKind::SeqstQpt => {
            let plan = check_plan_params(config)?;
            size_check("qubits for selective estimation", n, limits.selective_max_qubits)?;
            let pairs = targets(config, space, Some(n), None)?;
            let exact = kraus_to_chi(ch);
            outcome.entries = pairs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let est = seqst_qpt_sample(ch, a, b, &plan, &sampling_stream(config, i), &limits)?;
                    Ok(chi_entry(n, a, b, est.value(), &exact, est.shots).stderr(est.stderr))
                })
                .collect::<Result<_, CliError>>()?;
            outcome.plan = Some(echo(&plan, config.seed));
        }
        ProtocolKind::Seqpt => {
            size_check("qubits for selective estimation", n, limits.selective_max_qubits)?;
            check_plan_params(config)?;
            let (default_states, plan) = seqpt_single_shot_plan(config.epsilon, config.delta, ch.dim())?;
            let n_states = config.n_states.unwrap_or(default_states);
            let pairs = targets(config, space, Some(n), None)?;
            let exact = kraus_to_chi(ch);
            outcome.entries = pairs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let est = seqpt_estimate(ch, a, b, n_states, &plan, &sampling_stream(config, i))?;
                    Ok(chi_entry(n, a, b, est.value(), &exact, est.shots).stderr(est.stderr))
                })
                .collect::<Result<_, CliError>>()?;
            outcome.plan = Some(echo(&plan, config.seed));
            outcome.n_states = Some(n_states);
        }
        ProtocolKind::Validate => {
            size_check("qubits for validation", n, limits.selective_max_qubits)?;
            outcome.validity = Some(validate_channel(&kraus_to_chi(ch)));
        }
        ProtocolKind::SeqstState | ProtocolKind::StandardQst => {
            unreachable!("state protocols are dispatched separately")
        }
    }
    Ok(outcome)
}
