//! Selective state tomography: estimate one matrix element
//! `alpha_ab = <psi_a| rho |psi_b>` in any basis whose states can be prepared
//! by controlled unitaries `V_a |psi_0> = |psi_a>`.
//!
//! The circuit puts an ancilla in `|+>`, applies `V_b†` to the system when the
//! ancilla is `|0>` and `V_a†` when it is `|1>`, then measures
//! `|psi_0><psi_0| ⊗ sigma` with `sigma` in `{sigma_x, sigma_y}`. The ancilla is
//! the last (least significant) qubit of the joint register.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{OutcomeDistribution, RandomStream, ShotPlan, ThreeOutcomeTally};
use crate::pauli::{basis_size, pauli_matrix, Pauli, PauliLabel};
use crate::quantum::{
    gates, maximally_entangled_state, qubit_count, random_unitary, DensityMatrix, Operator, PureState,
    C64, I, ONE, ZERO,
};

/// Tolerance for preparator unitarity and basis orthonormality.
pub const BASIS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
enum Preparators {
    /// `V_a = R · X^a`: bit flips followed by a fixed unitary `R`.
    Rotated(Operator),
    /// `V_k = E_k ⊗ I` on a doubled register.
    ChoiPauli { n: usize },
    Explicit(Vec<Operator>),
}

/// A basis `{|psi_a> = V_a |psi_0>}` given by its fiducial state and preparators.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparationBasis {
    fiducial: PureState,
    preparators: Preparators,
}

fn bit_flips(n: usize, a: usize) -> Operator {
    (0..n)
        .map(|q| {
            if (a >> (n - 1 - q)) & 1 == 1 {
                gates::x()
            } else {
                gates::identity()
            }
        })
        .reduce(|acc, g| acc.tensor(&g))
        .expect("at least one qubit")
}

impl PreparationBasis {
    /// Computational basis: `|psi_0> = |0...0>`, `V_a` flips the bits of `a`.
    pub fn computational(n: usize) -> Self {
        Self::from_unitary(Operator::identity(1 << n)).expect("identity is unitary")
    }

    /// Product eigenbasis of the given per-qubit axes (`X`, `Y` or `Z`).
    pub fn pauli_eigenbasis(axes: &[Pauli]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidBasis("no axes given".into()));
        }
        let rotation = axes
            .iter()
            .map(|axis| match axis {
                Pauli::Z => Ok(gates::identity()),
                Pauli::X => Ok(gates::hadamard()),
                Pauli::Y => Ok(gates::phase() * gates::hadamard()),
                Pauli::I => Err(Error::InvalidBasis("identity is not a measurement axis".into())),
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .reduce(|acc, g| acc.tensor(&g))
            .expect("non-empty");
        Self::from_unitary(rotation)
    }

    /// Columns of `u` as the basis: `V_a = u · X^a`, `|psi_0> = |0...0>`.
    pub fn from_unitary(u: Operator) -> Result<Self> {
        qubit_count(u.dim())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::InvalidBasis(format!("dimension {} is not 2^n", u.dim())))?;
        let residual = u.unitarity_residual();
        if residual > BASIS_TOL {
            return Err(Error::NonUnitary { residual });
        }
        Ok(Self {
            fiducial: PureState::basis(u.dim(), 0)?,
            preparators: Preparators::Rotated(u),
        })
    }

    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_unitary(random_unitary(1 << n, rng)).expect("random unitary is unitary")
    }

    /// The basis `{(E_k ⊗ I)|I>}` of a doubled `n`-qubit register, in which a
    /// Choi state's matrix is the chi matrix of its channel.
    pub fn choi_pauli(n: usize) -> Self {
        Self {
            fiducial: maximally_entangled_state(n),
            preparators: Preparators::ChoiPauli { n },
        }
    }

    /// Arbitrary preparators, checked for unitarity and orthonormality.
    pub fn explicit(fiducial: PureState, preparators: Vec<Operator>) -> Result<Self> {
        if preparators.len() != fiducial.dim() {
            return Err(Error::InvalidBasis(format!(
                "{} preparators for dimension {}",
                preparators.len(),
                fiducial.dim()
            )));
        }
        if let Some(bad) = preparators.iter().find(|v| v.dim() != fiducial.dim()) {
            return Err(Error::DimensionMismatch {
                expected: fiducial.dim(),
                actual: bad.dim(),
            });
        }
        let basis = Self {
            fiducial,
            preparators: Preparators::Explicit(preparators),
        };
        basis.validate()?;
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.fiducial.dim()
    }

    pub fn num_qubits(&self) -> usize {
        qubit_count(self.dim()).expect("qubit register")
    }

    pub fn fiducial(&self) -> &PureState {
        &self.fiducial
    }

    fn check_index(&self, a: usize) -> Result<()> {
        if a >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: a,
                limit: self.dim(),
            });
        }
        Ok(())
    }

    /// `V_a`
    pub fn preparator(&self, a: usize) -> Result<Operator> {
        self.check_index(a)?;
        Ok(match &self.preparators {
            Preparators::Rotated(r) => r * &bit_flips(self.num_qubits(), a),
            Preparators::ChoiPauli { n } => {
                let label = PauliLabel::from_index(*n, a)?;
                pauli_matrix(&label).tensor(&Operator::identity(1 << n))
            }
            Preparators::Explicit(ops) => ops[a].clone(),
        })
    }

    /// `|psi_a> = V_a |psi_0>`
    pub fn state(&self, a: usize) -> Result<PureState> {
        Ok(self.fiducial.evolve(&self.preparator(a)?))
    }

    /// Checks every preparator is unitary and the prepared states are orthonormal.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let mut states = Vec::with_capacity(d);
        for a in 0..d {
            let v = self.preparator(a)?;
            let residual = v.unitarity_residual();
            if residual > BASIS_TOL {
                return Err(Error::NonUnitary { residual });
            }
            states.push(self.fiducial.evolve(&v));
        }
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate().skip(a) {
                let want = if a == b { ONE } else { ZERO };
                let err = (sa.inner(sb) - want).norm();
                if err > BASIS_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "<psi_{a}|psi_{b}> deviates by {err:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The three measurement outcomes of one SEQST run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeqstOutcome {
    /// System found in `|psi_0>`, ancilla in the `+1` eigenstate.
    Plus,
    /// System found in `|psi_0>`, ancilla in the `-1` eigenstate.
    Minus,
    /// System found elsewhere.
    Zero,
}

impl SeqstOutcome {
    pub fn value(self) -> i8 {
        match self {
            SeqstOutcome::Plus => 1,
            SeqstOutcome::Minus => -1,
            SeqstOutcome::Zero => 0,
        }
    }
}

/// Ancilla observable: `sigma_x` reads the real part, `sigma_y` the imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn observable(self) -> Operator {
        match self {
            Axis::X => gates::x(),
            Axis::Y => gates::y(),
        }
    }

    /// Projectors onto the `+1` and `-1` eigenstates.
    pub fn eigenprojectors(self) -> (Operator, Operator) {
        let h = C64::new(0.5, 0.0);
        let off = match self {
            Axis::X => h,
            // |s±> = (|0> ± i|1>)/sqrt 2, so <0|s±><s±|1> = ∓ i/2
            Axis::Y => -I * h,
        };
        let plus = Operator::from_rows(&[vec![h, off], vec![off.conj(), h]]).expect("2x2");
        let minus = Operator::from_rows(&[vec![h, -off], vec![-off.conj(), h]]).expect("2x2");
        (plus, minus)
    }
}

fn check_pair(basis: &PreparationBasis, rho: &DensityMatrix, a: usize, b: usize) -> Result<()> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: rho.dim(),
        });
    }
    basis.check_index(a)?;
    basis.check_index(b)
}

/// Joint `system ⊗ ancilla` state just before measurement.
///
/// Block `(s, t)` of the ancilla is `U_s rho U_t† / 2` with `U_0 = V_b†`, `U_1 = V_a†`.
pub fn seqst_joint_state(
    rho: &DensityMatrix,
    basis: &PreparationBasis,
    a: usize,
    b: usize,
) -> Result<DensityMatrix> {
    check_pair(basis, rho, a, b)?;
    let branches = [basis.preparator(b)?.dagger(), basis.preparator(a)?.dagger()];
    let d = basis.dim();
    let mut joint = DMatrix::zeros(2 * d, 2 * d);
    for (s, us) in branches.iter().enumerate() {
        for (t, ut) in branches.iter().enumerate() {
            let block = us.matrix() * rho.matrix() * ut.matrix().adjoint() * C64::new(0.5, 0.0);
            for i in 0..d {
                for j in 0..d {
                    joint[(2 * i + s, 2 * j + t)] = block[(i, j)];
                }
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(joint))
}

/// `Tr(joint · |phi><phi| ⊗ ancilla_op)` for a `system ⊗ qubit` state.
pub fn conditioned_ancilla_expectation(joint: &DensityMatrix, phi: &PureState, ancilla_op: &Operator) -> C64 {
    let d = phi.dim();
    assert_eq!(joint.dim(), 2 * d, "joint state must be system ⊗ one qubit");
    let m = joint.matrix();
    let v = phi.vector();
    let mut acc = ZERO;
    for s in 0..2 {
        for t in 0..2 {
            let op = ancilla_op.get(t, s);
            if op == ZERO {
                continue;
            }
            // <phi| B_st |phi> with B_st[i, j] = joint[2i + s, 2j + t]
            let mut block = ZERO;
            for i in 0..d {
                if v[i] == ZERO {
                    continue;
                }
                for j in 0..d {
                    block += v[i].conj() * m[(2 * i + s, 2 * j + t)] * v[j];
                }
            }
            acc += op * block;
        }
    }
    acc
}

fn distribution_from_joint(joint: &DensityMatrix, fiducial: &PureState, axis: Axis) -> OutcomeDistribution {
    let (plus, minus) = axis.eigenprojectors();
    OutcomeDistribution::from_plus_minus(
        conditioned_ancilla_expectation(joint, fiducial, &plus).re,
        conditioned_ancilla_expectation(joint, fiducial, &minus).re,
    )
}

/// `Tr(rho_F |psi_0><psi_0| ⊗ sigma_x) + i Tr(rho_F |psi_0><psi_0| ⊗ sigma_y)`,
/// which equals `<psi_a| rho |psi_b>`.
pub fn seqst_exact(rho: &DensityMatrix, basis: &PreparationBasis, a: usize, b: usize) -> Result<C64> {
    let joint = seqst_joint_state(rho, basis, a, b)?;
    let fid = basis.fiducial();
    let re = conditioned_ancilla_expectation(&joint, fid, &Axis::X.observable()).re;
    let im = conditioned_ancilla_expectation(&joint, fid, &Axis::Y.observable()).re;
    Ok(C64::new(re, im))
}

pub fn seqst_outcome_distribution(
    rho: &DensityMatrix,
    basis: &PreparationBasis,
    a: usize,
    b: usize,
    axis: Axis,
) -> Result<OutcomeDistribution> {
    let joint = seqst_joint_state(rho, basis, a, b)?;
    Ok(distribution_from_joint(&joint, basis.fiducial(), axis))
}

/// Raw outcome counts per measured axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisTallies {
    /// `[n+, n-, n0]`
    pub x: [u64; 3],
    pub y: [u64; 3],
}

/// A sampled estimate of one complex coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub a: usize,
    pub b: usize,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
    /// Shots per axis; the total is twice this.
    pub m_shots: u64,
    pub tallies: AxisTallies,
    pub seed: u64,
}

impl EstimateReport {
    pub fn estimate(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub(crate) fn from_tallies(a: usize, b: usize, x: ThreeOutcomeTally, y: ThreeOutcomeTally, seed: u64) -> Self {
        Self {
            a,
            b,
            re: x.mean(),
            im: y.mean(),
            se_re: x.standard_error(),
            se_im: y.standard_error(),
            m_shots: x.shots(),
            tallies: AxisTallies {
                x: x.as_array(),
                y: y.as_array(),
            },
            seed,
        }
    }
}

/// Samples the two three-outcome measurements of an already prepared joint state.
pub(crate) fn sample_joint(
    joint: &DensityMatrix,
    fiducial: &PureState,
    m: u64,
    stream: &RandomStream,
) -> Result<(ThreeOutcomeTally, ThreeOutcomeTally)> {
    let x = distribution_from_joint(joint, fiducial, Axis::X).sample(m, &stream.child(0))?;
    let y = distribution_from_joint(joint, fiducial, Axis::Y).sample(m, &stream.child(1))?;
    Ok((x, y))
}

/// Draws `plan.m` shots on each axis and averages the `{+1, -1, 0}` outcomes.
pub fn seqst_sample(
    rho: &DensityMatrix,
    basis: &PreparationBasis,
    a: usize,
    b: usize,
    plan: &ShotPlan,
    stream: &RandomStream,
) -> Result<EstimateReport> {
    let joint = seqst_joint_state(rho, basis, a, b)?;
    let (x, y) = sample_joint(&joint, basis.fiducial(), plan.m, stream)?;
    Ok(EstimateReport::from_tallies(a, b, x, y, stream.seed))
}

/// Expectation values `Tr(rho E_i)` for every Pauli basis element, in index order.
pub fn standard_pauli_qst(rho: &DensityMatrix) -> Result<Vec<(PauliLabel, f64)>> {
    let n = qubit_count(rho.dim())
        .filter(|&n| n >= 1)
        .ok_or(Error::DimensionMismatch {
            expected: rho.dim().next_power_of_two().max(2),
            actual: rho.dim(),
        })?;
    (0..basis_size(n))
        .map(|i| {
            let label = PauliLabel::from_index(n, i)?;
            let value = rho.expectation(&pauli_matrix(&label)).re;
            Ok((label, value))
        })
        .collect()
}

/// `(1/D) sum_i Tr(rho E_i) E_i`
pub fn reconstruct_from_paulis(expectations: &[(PauliLabel, f64)]) -> Result<Operator> {
    let n = expectations
        .first()
        .map(|(l, _)| l.num_qubits())
        .ok_or(Error::DimensionMismatch {
            expected: 4,
            actual: 0,
        })?;
    let d = 1usize << n;
    let mut out = DMatrix::zeros(d, d);
    for (label, value) in expectations {
        if label.num_qubits() != n {
            return Err(Error::LengthMismatch(n, label.num_qubits()));
        }
        out += pauli_matrix(label).matrix() * C64::new(value / d as f64, 0.0);
    }
    Operator::from_matrix(out)
}

/// Shot-sampled estimate of one Pauli expectation value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliEstimate {
    pub label: PauliLabel,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub shots: u64,
}

/// Measures every `E_i` with `plan.m` shots of `±1` outcomes.
pub fn standard_pauli_qst_sample(
    rho: &DensityMatrix,
    plan: &ShotPlan,
    stream: &RandomStream,
) -> Result<Vec<PauliEstimate>> {
    let exact = standard_pauli_qst(rho)?;
    exact
        .into_iter()
        .enumerate()
        .map(|(i, (label, value))| {
            let dist = OutcomeDistribution::from_plus_minus((1.0 + value) / 2.0, (1.0 - value) / 2.0);
            let tally = dist.sample(plan.m, &stream.child(i as u64))?;
            Ok(PauliEstimate {
                label,
                estimate: tally.mean(),
                stderr: tally.standard_error(),
                exact: value,
                shots: plan.m,
            })
        })
        .collect()
}
