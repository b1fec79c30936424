//! Process tomography protocols built on the Choi state `rho_E = (E ⊗ I)(|I><I|)`.
//!
//! * AAPT: the full chi matrix as the Choi state's matrix in the basis
//!   `R = {(E_k ⊗ I)|I>}`.
//! * DCQD: `chi_kk` as the probability of outcome `k` when measuring in `R`.
//! * SEQST-QPT: selective state tomography of the Choi state in `R`.
//! * SEQPT: Haar averages of an ancilla-controlled Pauli circuit, inverted
//!   through `avg_x = (D Re chi_ab + delta_ab)/(D+1)`, `avg_y = D Im chi_ab/(D+1)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channels::{choi_state, ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::estimation::{sample_categorical, OutcomeDistribution, RandomStream, ShotPlan, ThreeOutcomeTally};
use crate::pauli::{basis_size, pauli_matrix, PauliLabel};
use crate::quantum::{haar_random_state, maximally_entangled_state, DensityMatrix, Operator, PureState, C64, ZERO};
use crate::seqst::{sample_joint, seqst_exact, seqst_joint_state, Axis, PreparationBasis};

/// Largest register sizes the dense protocols accept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeLimits {
    /// Qubits for protocols that materialize the whole `4^n x 4^n` chi matrix.
    pub full_max_qubits: usize,
    /// Qubits for selective protocols (joint register of `2n + 1` qubits).
    pub selective_max_qubits: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        Self {
            full_max_qubits: 2,
            selective_max_qubits: 3,
        }
    }
}

impl SizeLimits {
    fn check_full(&self, what: &'static str, n: usize) -> Result<()> {
        if n > self.full_max_qubits {
            return Err(Error::SizeLimitExceeded {
                what,
                requested: n,
                limit: self.full_max_qubits,
            });
        }
        Ok(())
    }

    fn check_selective(&self, what: &'static str, n: usize) -> Result<()> {
        if n > self.selective_max_qubits {
            return Err(Error::SizeLimitExceeded {
                what,
                requested: n,
                limit: self.selective_max_qubits,
            });
        }
        Ok(())
    }
}

/// The orthonormal basis `{(E_k ⊗ I)|I>}` of a doubled `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiBasisR {
    n: usize,
}

impl ChoiBasisR {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Self { n }
    }

    pub fn len(&self) -> usize {
        basis_size(self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, k: usize) -> Result<PureState> {
        let label = PauliLabel::from_index(self.n, k)?;
        let op = pauli_matrix(&label).tensor(&Operator::identity(1 << self.n));
        PureState::new(op.apply(&maximally_entangled_state(self.n)).iter().copied().collect())
    }

    pub fn elements(&self) -> Vec<PureState> {
        (0..self.len())
            .map(|k| self.element(k).expect("index in range"))
            .collect()
    }

    /// `G_mn = <r_m|r_n>`
    pub fn gram(&self) -> Operator {
        let els = self.elements();
        let size = els.len();
        Operator::from_matrix(DMatrix::from_fn(size, size, |m, n| els[m].inner(&els[n]))).expect("square")
    }

    pub fn as_preparation_basis(&self) -> PreparationBasis {
        PreparationBasis::choi_pauli(self.n)
    }
}

/// Which protocol produced an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "AAPT")]
    Aapt,
    #[serde(rename = "DCQD")]
    Dcqd,
    #[serde(rename = "SEQST-QPT")]
    SeqstQpt,
    #[serde(rename = "SEQPT")]
    Seqpt,
}

/// A complex number serialized as `{re, im}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReIm {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ReIm {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ReIm> for C64 {
    fn from(z: ReIm) -> Self {
        C64::new(z.re, z.im)
    }
}

/// A sampled estimate of one chi-matrix entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub protocol: Protocol,
    pub a: PauliLabel,
    pub b: PauliLabel,
    pub value: ReIm,
    /// Standard error of the real and imaginary parts.
    pub stderr: ReIm,
    /// Total simulated runs across both axes (and all sampled states).
    pub shots: u64,
    pub seed: u64,
}

impl ChiEstimate {
    pub fn value(&self) -> C64 {
        self.value.into()
    }
}

fn check_chi_index(n: usize, k: usize) -> Result<()> {
    let limit = basis_size(n);
    if k >= limit {
        return Err(Error::IndexOutOfRange { index: k, limit });
    }
    Ok(())
}

/// Full chi matrix read off the Choi state: `chi_mn = <r_m| rho_E |r_n>`.
pub fn aapt_full_chi(ch: &KrausChannel, limits: &SizeLimits) -> Result<ChiMatrix> {
    let n = ch.num_qubits();
    limits.check_full("full chi reconstruction", n)?;
    let rho = choi_state(ch);
    let r = ChoiBasisR::new(n).elements();
    let size = r.len();
    let applied: Vec<_> = r.iter().map(|v| rho.matrix() * v.vector()).collect();
    let chi = DMatrix::from_fn(size, size, |m, k| r[m].vector().dotc(&applied[k]));
    ChiMatrix::new(n, chi)
}

/// Probabilities `<r_k| rho_E |r_k>` of every outcome of a measurement in `R`.
pub fn dcqd_distribution(ch: &KrausChannel) -> Vec<f64> {
    let rho = choi_state(ch);
    ChoiBasisR::new(ch.num_qubits())
        .elements()
        .iter()
        .map(|r| rho.matrix_element(r, r).re)
        .collect()
}

/// `chi_kk` as the probability of finding the Choi state in `(E_k ⊗ I)|I>`.
pub fn dcqd_diagonal(ch: &KrausChannel, k: usize) -> Result<f64> {
    check_chi_index(ch.num_qubits(), k)?;
    let r = ChoiBasisR::new(ch.num_qubits()).element(k)?;
    Ok(choi_state(ch).matrix_element(&r, &r).re)
}

/// Relative frequency of one outcome of a sampled measurement in `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalEstimate {
    pub k: usize,
    pub label: PauliLabel,
    pub count: u64,
    pub frequency: f64,
    pub stderr: f64,
}

/// Draws `plan.m` outcomes of the measurement in `R` on the Choi state.
pub fn dcqd_diagonal_sample(
    ch: &KrausChannel,
    plan: &ShotPlan,
    stream: &RandomStream,
) -> Result<Vec<DiagonalEstimate>> {
    let n = ch.num_qubits();
    let probs = dcqd_distribution(ch);
    let counts = sample_categorical(&probs, plan.m, stream)?;
    let m = plan.m as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let f = count as f64 / m;
            Ok(DiagonalEstimate {
                k,
                label: PauliLabel::from_index(n, k)?,
                count,
                frequency: f,
                stderr: (f * (1.0 - f) / m).sqrt(),
            })
        })
        .collect()
}

fn check_pair(n: usize, a: usize, b: usize) -> Result<()> {
    check_chi_index(n, a)?;
    check_chi_index(n, b)
}

/// Selective state tomography of the Choi state in `R`: returns `chi_ab`.
pub fn seqst_qpt_exact(ch: &KrausChannel, a: usize, b: usize, limits: &SizeLimits) -> Result<C64> {
    let n = ch.num_qubits();
    limits.check_selective("selective process tomography", n)?;
    check_pair(n, a, b)?;
    seqst_exact(&choi_state(ch), &PreparationBasis::choi_pauli(n), a, b)
}

pub fn seqst_qpt_sample(
    ch: &KrausChannel,
    a: usize,
    b: usize,
    plan: &ShotPlan,
    stream: &RandomStream,
    limits: &SizeLimits,
) -> Result<ChiEstimate> {
    let n = ch.num_qubits();
    limits.check_selective("selective process tomography", n)?;
    check_pair(n, a, b)?;
    let basis = PreparationBasis::choi_pauli(n);
    let joint = seqst_joint_state(&choi_state(ch), &basis, a, b)?;
    let (x, y) = sample_joint(&joint, basis.fiducial(), plan.m, stream)?;
    Ok(ChiEstimate {
        protocol: Protocol::SeqstQpt,
        a: PauliLabel::from_index(n, a)?,
        b: PauliLabel::from_index(n, b)?,
        value: ReIm {
            re: x.mean(),
            im: y.mean(),
        },
        stderr: ReIm {
            re: x.standard_error(),
            im: y.standard_error(),
        },
        shots: x.shots() + y.shots(),
        seed: stream.seed,
    })
}

/// Joint `ancilla ⊗ system` output of the SEQPT circuit for input `|psi>`.
///
/// The ancilla starts in `|+>`; `E_b` acts on the system for ancilla `|0>` and
/// `E_a` for ancilla `|1>`; then the channel acts on the system.
pub fn seqpt_joint_output(ch: &KrausChannel, a: usize, b: usize, psi: &PureState) -> Result<DensityMatrix> {
    let n = ch.num_qubits();
    check_pair(n, a, b)?;
    let d = ch.dim();
    if psi.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: psi.dim(),
        });
    }
    let branches = [
        pauli_matrix(&PauliLabel::from_index(n, b)?).apply(psi),
        pauli_matrix(&PauliLabel::from_index(n, a)?).apply(psi),
    ];
    let mut joint = DMatrix::zeros(2 * d, 2 * d);
    for (s, vs) in branches.iter().enumerate() {
        for (t, vt) in branches.iter().enumerate() {
            let mut block = DMatrix::zeros(d, d);
            for k in ch.kraus_ops() {
                let ks = k.matrix() * vs;
                let kt = k.matrix() * vt;
                block += &ks * kt.adjoint();
            }
            block *= C64::new(0.5, 0.0);
            joint.view_mut((s * d, t * d), (d, d)).copy_from(&block);
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(joint))
}

fn ancilla_system_expectation(joint: &DensityMatrix, ancilla_op: &Operator, psi: &PureState) -> f64 {
    joint
        .expectation(&ancilla_op.tensor(&psi.projector().to_operator()))
        .re
}

/// `(<sigma_x ⊗ |psi><psi|>, <sigma_y ⊗ |psi><psi|>)` on the circuit output.
pub fn seqpt_single_state(ch: &KrausChannel, a: usize, b: usize, psi: &PureState) -> Result<(f64, f64)> {
    let joint = seqpt_joint_output(ch, a, b, psi)?;
    Ok((
        ancilla_system_expectation(&joint, &Axis::X.observable(), psi),
        ancilla_system_expectation(&joint, &Axis::Y.observable(), psi),
    ))
}

/// `<psi| E(E_a |psi><psi| E_b†) |psi>`, equal to `x + i y` of [`seqpt_single_state`].
pub fn seqpt_cross_term(ch: &KrausChannel, a: usize, b: usize, psi: &PureState) -> Result<C64> {
    let n = ch.num_qubits();
    check_pair(n, a, b)?;
    let ea = pauli_matrix(&PauliLabel::from_index(n, a)?);
    let eb = pauli_matrix(&PauliLabel::from_index(n, b)?);
    let input = Operator::outer(&psi.evolve(&ea), &psi.evolve(&eb));
    // apply the Kraus map to a non-Hermitian operator directly
    let out = ch
        .kraus_ops()
        .iter()
        .fold(Operator::zeros(ch.dim()), |acc, k| &acc + &(k * &input * k.dagger()));
    Ok(psi.vector().dotc(&out.apply(psi)))
}

/// Three-outcome distributions of the `sigma_x` and `sigma_y` readouts for `|psi>`.
pub fn seqpt_outcome_distributions(
    ch: &KrausChannel,
    a: usize,
    b: usize,
    psi: &PureState,
) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
    let joint = seqpt_joint_output(ch, a, b, psi)?;
    let dist = |axis: Axis| {
        let (plus, minus) = axis.eigenprojectors();
        OutcomeDistribution::from_plus_minus(
            ancilla_system_expectation(&joint, &plus, psi),
            ancilla_system_expectation(&joint, &minus, psi),
        )
    };
    Ok((dist(Axis::X), dist(Axis::Y)))
}

/// Exact Haar averages of [`seqpt_single_state`].
///
/// Each Kraus term contributes `<psi|A|psi><psi|B|psi>` with `A = K E_a`,
/// `B = E_b K†`; the Haar second moment `(I + SWAP)/(D(D+1))` turns its
/// average into `(Tr A Tr B + Tr AB) / (D(D+1))`.
pub fn seqpt_exact_average(ch: &KrausChannel, a: usize, b: usize) -> Result<(f64, f64)> {
    let n = ch.num_qubits();
    check_pair(n, a, b)?;
    let d = ch.dim() as f64;
    let ea = pauli_matrix(&PauliLabel::from_index(n, a)?);
    let eb = pauli_matrix(&PauliLabel::from_index(n, b)?);
    let mut acc = ZERO;
    for k in ch.kraus_ops() {
        let left = k * &ea;
        let right = &eb * &k.dagger();
        acc += left.trace() * right.trace() + (&left * &right).trace();
    }
    let avg = acc / C64::new(d * (d + 1.0), 0.0);
    Ok((avg.re, avg.im))
}

/// `(D Re chi_ab + delta_ab)/(D+1)` and `D Im chi_ab/(D+1)`.
pub fn seqpt_expected_average(chi_ab: C64, d: usize, same_index: bool) -> (f64, f64) {
    let d = d as f64;
    let delta = if same_index { 1.0 } else { 0.0 };
    ((d * chi_ab.re + delta) / (d + 1.0), d * chi_ab.im / (d + 1.0))
}

/// Inverts the Haar-average relations: `Re chi = ((D+1) avg_x - delta)/D`, `Im chi = (D+1) avg_y / D`.
pub fn seqpt_invert(avg_x: f64, avg_y: f64, d: usize, same_index: bool) -> C64 {
    let d = d as f64;
    let delta = if same_index { 1.0 } else { 0.0 };
    C64::new(((d + 1.0) * avg_x - delta) / d, (d + 1.0) * avg_y / d)
}

/// Single-shot SEQPT budget: one shot per axis on each of `n_states` Haar
/// states, with `n_states` from the Hoeffding bound at the readout precision
/// `epsilon * D/(D+1)` that the inversion needs for a chi precision of `epsilon`.
pub fn seqpt_single_shot_plan(epsilon: f64, delta: f64, d: usize) -> Result<(usize, ShotPlan)> {
    let readout = epsilon * d as f64 / (d as f64 + 1.0);
    let states = crate::estimation::chernoff_plan(readout, delta)?.m as usize;
    Ok((states, ShotPlan::with_shots(epsilon, delta, 1)?))
}

struct StateDraw {
    x: ThreeOutcomeTally,
    y: ThreeOutcomeTally,
}

fn seqpt_draw(ch: &KrausChannel, a: usize, b: usize, m: u64, stream: &RandomStream) -> Result<StateDraw> {
    let stream = stream.with_workers(1);
    let psi = haar_random_state(ch.dim(), &mut stream.child(0).rng());
    let (dx, dy) = seqpt_outcome_distributions(ch, a, b, &psi)?;
    Ok(StateDraw {
        x: dx.sample(m, &stream.child(1))?,
        y: dy.sample(m, &stream.child(2))?,
    })
}

/// Samples `n_states` Haar-random inputs, `plan.m` shots per axis on each, and
/// inverts the averaged readouts into `chi_ab`.
///
/// State `i` draws everything from `stream.child(i)`, so results do not depend
/// on `stream.workers`.
pub fn seqpt_estimate(
    ch: &KrausChannel,
    a: usize,
    b: usize,
    n_states: usize,
    plan: &ShotPlan,
    stream: &RandomStream,
) -> Result<ChiEstimate> {
    let n = ch.num_qubits();
    check_pair(n, a, b)?;
    if n_states == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n_states".into(),
            reason: "need at least one state".into(),
        });
    }
    let workers = stream.workers.clamp(1, n_states);
    let draws: Vec<StateDraw> = if workers == 1 {
        (0..n_states)
            .map(|i| seqpt_draw(ch, a, b, plan.m, &stream.child(i as u64)))
            .collect::<Result<_>>()?
    } else {
        let mut slots: Vec<Option<Result<StateDraw>>> = (0..n_states).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunks = slots.chunks_mut(n_states.div_ceil(workers));
            let mut offset = 0;
            for chunk in chunks {
                let start = offset;
                offset += chunk.len();
                scope.spawn(move || {
                    for (j, slot) in chunk.iter_mut().enumerate() {
                        let i = (start + j) as u64;
                        *slot = Some(seqpt_draw(ch, a, b, plan.m, &stream.child(i)));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every state drawn"))
            .collect::<Result<_>>()?
    };

    let mut pooled_x = ThreeOutcomeTally::default();
    let mut pooled_y = ThreeOutcomeTally::default();
    for draw in &draws {
        pooled_x.add(&draw.x);
        pooled_y.add(&draw.y);
    }
    let (avg_x, avg_y) = (pooled_x.mean(), pooled_y.mean());

    // per-state means carry the spread over inputs as well as shot noise
    let between_state_se = |means: Vec<f64>| {
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    };
    let (se_x, se_y) = if n_states >= 2 {
        (
            between_state_se(draws.iter().map(|d| d.x.mean()).collect()),
            between_state_se(draws.iter().map(|d| d.y.mean()).collect()),
        )
    } else {
        (pooled_x.standard_error(), pooled_y.standard_error())
    };

    let d = ch.dim();
    let scale = (d as f64 + 1.0) / d as f64;
    Ok(ChiEstimate {
        protocol: Protocol::Seqpt,
        a: PauliLabel::from_index(n, a)?,
        b: PauliLabel::from_index(n, b)?,
        value: seqpt_invert(avg_x, avg_y, d, a == b).into(),
        stderr: ReIm {
            re: scale * se_x,
            im: scale * se_y,
        },
        shots: pooled_x.shots() + pooled_y.shots(),
        seed: stream.seed,
    })
}

/// A gate of the entangling circuit. Qubit 0 is the most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Hadamard(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Hadamard(_) => 1,
            Gate::Cnot { .. } => 2,
        }
    }
}

/// Prepares `|I>` on `2n` qubits from `|0...0>`: a Hadamard on each qubit of the
/// first register, then a CNOT from qubit `q` to qubit `n + q`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglerCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl EntanglerCircuit {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut gates: Vec<Gate> = (0..n).map(Gate::Hadamard).collect();
        gates.extend((0..n).map(|q| Gate::Cnot {
            control: q,
            target: n + q,
        }));
        Self { n, gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn single_qubit_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() == 1).count()
    }

    pub fn two_qubit_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() == 2).count()
    }

    /// The disentangling circuit used to measure in the `|I>` frame.
    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            gates: self.gates.iter().rev().copied().collect(),
        }
    }

    pub fn run(&self, input: &PureState) -> Result<PureState> {
        let total = 2 * self.n;
        if input.dim() != 1 << total {
            return Err(Error::DimensionMismatch {
                expected: 1 << total,
                actual: input.dim(),
            });
        }
        let mut amps: Vec<C64> = input.amplitudes().to_vec();
        let bit = |q: usize| 1usize << (total - 1 - q);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for gate in &self.gates {
            match *gate {
                Gate::Hadamard(q) => {
                    let mask = bit(q);
                    for i in 0..amps.len() {
                        if i & mask == 0 {
                            let (lo, hi) = (amps[i], amps[i | mask]);
                            amps[i] = (lo + hi) * h;
                            amps[i | mask] = (lo - hi) * h;
                        }
                    }
                }
                Gate::Cnot { control, target } => {
                    let (cm, tm) = (bit(control), bit(target));
                    for i in 0..amps.len() {
                        if i & cm != 0 && i & tm == 0 {
                            amps.swap(i, i | tm);
                        }
                    }
                }
            }
        }
        PureState::new(amps)
    }

    pub fn prepare(&self) -> PureState {
        let zero = PureState::basis(1 << (2 * self.n), 0).expect("non-empty register");
        self.run(&zero).expect("register size matches")
    }
}
