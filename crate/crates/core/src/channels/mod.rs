//! Quantum channels in Kraus and chi-matrix form.
//!
//! The chi matrix is always expanded over the Pauli basis of [`crate::pauli`]:
//! `E(rho) = sum_mn chi_mn E_m rho E_n†`.

mod zoo;

pub use zoo::{channel_zoo, zoo_instances, zoo_names, ChannelSpec, ComplexMatrix, ZooParams};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{basis_size, pauli_basis, pauli_product, PauliLabel};
use crate::quantum::{
    maximally_entangled_state, qubit_count, random_unitary, DensityMatrix, Operator, C64, ONE, ZERO,
};

/// Tolerance on the Kraus completeness relation and chi-matrix predicates.
pub const CHANNEL_TOL: f64 = 1e-9;
/// Eigenvalues below this are a genuine violation of complete positivity.
pub const CP_REJECT_TOL: f64 = 1e-7;
/// Eigenvalues below this are treated as numerical zeros when extracting Kraus operators.
pub const KRAUS_DROP_TOL: f64 = 1e-9;

/// A trace-preserving channel `rho -> sum_k K_k rho K_k†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<Operator>,
}

impl KrausChannel {
    /// Checks dimensions and the completeness relation `sum_k K_k† K_k = I`.
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let ch = Self::new_unchecked(ops)?;
        let residual = ch.completeness_residual();
        if residual > CHANNEL_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    /// Checks only shapes; completeness is left to the caller.
    pub fn new_unchecked(ops: Vec<Operator>) -> Result<Self> {
        let first = ops.first().ok_or(Error::DimensionMismatch {
            expected: 1,
            actual: 0,
        })?;
        let dim = first.dim();
        let n = qubit_count(dim)
            .filter(|&n| n >= 1)
            .ok_or(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                actual: dim,
            })?;
        if let Some(bad) = ops.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        Ok(Self { n, ops })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            ops: vec![Operator::identity(1 << n)],
        }
    }

    pub fn unitary(u: Operator) -> Result<Self> {
        let residual = u.unitarity_residual();
        if residual > CHANNEL_TOL {
            return Err(Error::NonUnitary { residual });
        }
        Self::new(vec![u])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .ops
            .iter()
            .fold(Operator::zeros(d), |acc, k| &acc + &(k.dagger() * k));
        sum.max_abs_diff(&Operator::identity(d))
    }

    /// `other ∘ self`: apply `self` first. Kraus set is every pairwise product.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let ops = other
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b * a))
            .collect();
        Ok(Self { n: self.n, ops })
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let ops = self
            .ops
            .iter()
            .flat_map(|a| other.ops.iter().map(move |b| a.tensor(b)))
            .collect();
        Self {
            n: self.n + other.n,
            ops,
        }
    }

    /// The same single-register channel acting independently on `copies` registers.
    pub fn tensor_power(&self, copies: usize) -> KrausChannel {
        assert!(copies >= 1);
        (1..copies).fold(self.clone(), |acc, _| acc.tensor(self))
    }
}

/// Chi-matrix of a channel on `n` qubits, `4^n x 4^n`, indexed by Pauli indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    n: usize,
    entries: Operator,
}

impl ChiMatrix {
    pub fn new(n: usize, entries: DMatrix<C64>) -> Result<Self> {
        let size = basis_size(n);
        if n == 0 || entries.nrows() != size || entries.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                actual: entries.nrows(),
            });
        }
        Ok(Self {
            n,
            entries: Operator::from_matrix(entries)?,
        })
    }

    /// Chi matrix with a single unit entry at `(m, n)`.
    pub fn unit(n: usize, m: usize, k: usize) -> Result<Self> {
        let size = basis_size(n);
        for idx in [m, k] {
            if idx >= size {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    limit: size,
                });
            }
        }
        let mut e = DMatrix::zeros(size, size);
        e[(m, k)] = ONE;
        Self::new(n, e)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of Pauli basis elements, `4^n`.
    pub fn size(&self) -> usize {
        self.entries.dim()
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.entries.get(m, n)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.entries
    }

    pub fn scaled(&self, factor: f64) -> ChiMatrix {
        Self {
            n: self.n,
            entries: self.entries.scale(C64::new(factor, 0.0)),
        }
    }

    pub fn max_abs_diff(&self, other: &ChiMatrix) -> f64 {
        self.entries.max_abs_diff(&other.entries)
    }

    /// CSV rows `m,n,label_m,label_n,re,im` in row-major index order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,label_m,label_n,re,im\n");
        for m in 0..self.size() {
            let lm = PauliLabel::from_index(self.n, m).expect("index in range");
            for k in 0..self.size() {
                let lk = PauliLabel::from_index(self.n, k).expect("index in range");
                let v = self.get(m, k);
                out.push_str(&format!("{m},{k},{lm},{lk},{:e},{:e}\n", v.re, v.im));
            }
        }
        out
    }

    /// Parses the [`ChiMatrix::to_csv`] layout.
    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidState(format!("bad chi csv row `{line}`"));
        let mut rows = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(bad(line));
            }
            let m: usize = cols[0].parse().map_err(|_| bad(line))?;
            let k: usize = cols[1].parse().map_err(|_| bad(line))?;
            let re: f64 = cols[4].parse().map_err(|_| bad(line))?;
            let im: f64 = cols[5].parse().map_err(|_| bad(line))?;
            rows.push((m, k, C64::new(re, im)));
        }
        let size = (rows.len() as f64).sqrt().round() as usize;
        let n = qubit_count(size)
            .filter(|b| b % 2 == 0 && *b > 0)
            .map(|b| b / 2)
            .ok_or(Error::DimensionMismatch {
                expected: size * size,
                actual: rows.len(),
            })?;
        let mut e = DMatrix::zeros(size, size);
        for (m, k, v) in rows {
            if m >= size || k >= size {
                return Err(Error::IndexOutOfRange {
                    index: m.max(k),
                    limit: size,
                });
            }
            e[(m, k)] = v;
        }
        Self::new(n, e)
    }
}

fn check_state_dim(expected: usize, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: rho.dim(),
        });
    }
    Ok(())
}

pub fn apply_kraus(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_state_dim(ch.dim(), rho)?;
    let d = ch.dim();
    let out = ch.ops.iter().fold(DMatrix::zeros(d, d), |acc, k| {
        acc + k.matrix() * rho.matrix() * k.matrix().adjoint()
    });
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Evaluates `sum_mn chi_mn E_m rho E_n†` term by term.
pub fn apply_chi(chi: &ChiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = 1usize << chi.n;
    check_state_dim(d, rho)?;
    let basis = pauli_basis(chi.n);
    let left: Vec<DMatrix<C64>> = basis.iter().map(|e| e.matrix() * rho.matrix()).collect();
    let mut out = DMatrix::zeros(d, d);
    for (m, lm) in left.iter().enumerate() {
        for (k, ek) in basis.iter().enumerate() {
            let c = chi.get(m, k);
            if c != ZERO {
                out += lm * ek.matrix().adjoint() * c;
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Pauli-basis expansion coefficients `c_m = Tr(E_m† K) / D` of one operator.
pub fn pauli_coefficients(op: &Operator) -> Vec<C64> {
    let n = qubit_count(op.dim()).expect("qubit operator");
    let d = C64::new(op.dim() as f64, 0.0);
    pauli_basis(n)
        .iter()
        .map(|e| (e.dagger() * op).trace() / d)
        .collect()
}

/// `chi_mn = sum_k c_km conj(c_kn)` with `K_k = sum_m c_km E_m`.
pub fn kraus_to_chi(ch: &KrausChannel) -> ChiMatrix {
    let size = basis_size(ch.n);
    let mut chi = DMatrix::zeros(size, size);
    for k in &ch.ops {
        let c = DVector::from_vec(pauli_coefficients(k));
        chi += &c * c.adjoint();
    }
    ChiMatrix::new(ch.n, chi).expect("chi dimensions follow from channel")
}

/// Kraus operators `sqrt(lambda_k) sum_m v_km E_m` from the eigenpairs of chi.
///
/// Trace preservation of the result is inherited from `chi`.
pub fn chi_to_kraus(chi: &ChiMatrix) -> Result<KrausChannel> {
    let (values, vectors) = chi.entries.hermitian_eigen();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -CP_REJECT_TOL {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
    }
    let basis = pauli_basis(chi.n);
    let d = 1usize << chi.n;
    let mut ops = Vec::new();
    for (idx, &lambda) in values.iter().enumerate() {
        if lambda < KRAUS_DROP_TOL {
            continue;
        }
        let scale = lambda.sqrt();
        let mut k = DMatrix::zeros(d, d);
        for (m, e) in basis.iter().enumerate() {
            let v = vectors[(m, idx)];
            if v != ZERO {
                k += e.matrix() * (v * scale);
            }
        }
        ops.push(Operator::from_matrix(k)?);
    }
    if ops.is_empty() {
        ops.push(Operator::zeros(d));
    }
    KrausChannel::new_unchecked(ops)
}

/// `rho_E = (E ⊗ I)(|I><I|)`, a `4^n`-dimensional state; channel acts on the first register.
pub fn choi_state(ch: &KrausChannel) -> DensityMatrix {
    let d = ch.dim();
    let omega = maximally_entangled_state(ch.n);
    let id = Operator::identity(d);
    let mut out = DMatrix::zeros(d * d, d * d);
    for k in &ch.ops {
        let v = k.tensor(&id).apply(&omega);
        out += &v * v.adjoint();
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// One predicate of [`ValidityReport`] together with its numerical witness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateCheck {
    pub holds: bool,
    pub value: f64,
}

/// Hermiticity, trace preservation, and complete positivity of a chi matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// `max |chi - chi†|`
    pub hermitian: PredicateCheck,
    /// `max |sum_mn chi_mn E_n† E_m - I|`
    pub trace_preserving: PredicateCheck,
    /// Smallest eigenvalue of the Hermitian part of chi.
    pub completely_positive: PredicateCheck,
}

impl ValidityReport {
    pub fn all_hold(&self) -> bool {
        self.hermitian.holds && self.trace_preserving.holds && self.completely_positive.holds
    }
}

/// `sum_mn chi_mn E_n† E_m`, accumulated symbolically through Pauli products.
pub fn trace_preservation_operator(chi: &ChiMatrix) -> Operator {
    let n = chi.n;
    let size = chi.size();
    let mut coeffs = vec![ZERO; size];
    let labels: Vec<PauliLabel> = (0..size)
        .map(|m| PauliLabel::from_index(n, m).expect("index in range"))
        .collect();
    for m in 0..size {
        for k in 0..size {
            let c = chi.get(m, k);
            if c == ZERO {
                continue;
            }
            let prod = pauli_product(&labels[k], &labels[m]).expect("same qubit count");
            coeffs[prod.label.index()] += c * prod.phase.to_complex();
        }
    }
    let d = 1usize << n;
    let mut out = DMatrix::zeros(d, d);
    for (p, e) in pauli_basis(n).iter().enumerate() {
        if coeffs[p] != ZERO {
            out += e.matrix() * coeffs[p];
        }
    }
    Operator::from_matrix(out).expect("square")
}

pub fn validate_channel(chi: &ChiMatrix) -> ValidityReport {
    let herm = chi.entries.hermiticity_residual();
    let d = 1usize << chi.n;
    let tp = trace_preservation_operator(chi).max_abs_diff(&Operator::identity(d));
    let min_eig = chi.entries.hermitian_eigenvalues()[0];
    ValidityReport {
        hermitian: PredicateCheck {
            holds: herm <= CHANNEL_TOL,
            value: herm,
        },
        trace_preserving: PredicateCheck {
            holds: tp <= CHANNEL_TOL,
            value: tp,
        },
        completely_positive: PredicateCheck {
            holds: min_eig >= -CHANNEL_TOL,
            value: min_eig,
        },
    }
}

/// Random channel with `rank` Kraus operators cut from a Haar-random isometry.
pub fn random_channel<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> KrausChannel {
    assert!(n >= 1 && rank >= 1);
    let d = 1usize << n;
    let u = random_unitary(rank * d, rng);
    let ops = (0..rank)
        .map(|k| {
            let block = u.matrix().view((k * d, 0), (d, d)).into_owned();
            Operator::from_matrix(block).expect("square block")
        })
        .collect();
    KrausChannel::new_unchecked(ops).expect("qubit dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{gates, random_density_matrix, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn depolarizing(p: f64) -> KrausChannel {
        KrausChannel::new(vec![
            gates::identity().scale(c((1.0 - 3.0 * p / 4.0).sqrt())),
            gates::x().scale(c((p / 4.0).sqrt())),
            gates::y().scale(c((p / 4.0).sqrt())),
            gates::z().scale(c((p / 4.0).sqrt())),
        ])
        .unwrap()
    }

    fn amplitude_damping(gamma: f64) -> KrausChannel {
        KrausChannel::new(vec![
            Operator::diagonal(&[ONE, c((1.0 - gamma).sqrt())]),
            Operator::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn apply_kraus_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density_matrix(2, &mut rng);
        assert!(apply_kraus(&KrausChannel::identity(1), &rho).unwrap().max_abs_diff(&rho) < 1e-15);

        let zero = PureState::basis(2, 0).unwrap().projector();
        let one = PureState::basis(2, 1).unwrap().projector();
        let flip = KrausChannel::unitary(gates::x()).unwrap();
        assert!(apply_kraus(&flip, &zero).unwrap().max_abs_diff(&one) < 1e-15);

        // p = 1: weights (1/4, 1/4, 1/4, 1/4), X and Y send |0><0| to |1><1|
        let out = apply_kraus(&depolarizing(1.0), &zero).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-15);

        assert!(matches!(
            apply_kraus(&flip, &DensityMatrix::maximally_mixed(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kraus_validation() {
        let half = Operator::identity(2).scale(c(0.5));
        assert!(matches!(
            KrausChannel::new(vec![half]),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(KrausChannel::new(vec![Operator::identity(3)]).is_err());
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn kraus_to_chi_examples() {
        let id = kraus_to_chi(&KrausChannel::identity(1));
        assert!(id.max_abs_diff(&ChiMatrix::unit(1, 0, 0).unwrap()) < 1e-15);

        let x = kraus_to_chi(&KrausChannel::unitary(gates::x()).unwrap());
        assert!(x.max_abs_diff(&ChiMatrix::unit(1, 1, 1).unwrap()) < 1e-15);

        let p = 0.3;
        let chi = kraus_to_chi(&depolarizing(p));
        let diag = [1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0];
        for m in 0..4 {
            for k in 0..4 {
                let want = if m == k { diag[m] } else { 0.0 };
                assert!((chi.get(m, k) - c(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn apply_chi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density_matrix(4, &mut rng);
        let id = ChiMatrix::unit(2, 0, 0).unwrap();
        assert!(apply_chi(&id, &rho).unwrap().max_abs_diff(&rho) < 1e-15);

        let k = 7;
        let e = pauli_basis(2)[k].clone();
        let expected = e.clone() * rho.to_operator() * e;
        let got = apply_chi(&ChiMatrix::unit(2, k, k).unwrap(), &rho).unwrap();
        assert!(got.to_operator().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn chi_to_kraus_examples() {
        let id = chi_to_kraus(&ChiMatrix::unit(1, 0, 0).unwrap()).unwrap();
        assert_eq!(id.kraus_ops().len(), 1);
        let k = &id.kraus_ops()[0];
        let phase = k.get(0, 0);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(k.scale(phase.conj()).max_abs_diff(&Operator::identity(2)) < 1e-12);

        let p = 0.2;
        let chi = kraus_to_chi(&depolarizing(p));
        let ops = chi_to_kraus(&chi).unwrap();
        assert_eq!(ops.kraus_ops().len(), 4);
        for op in ops.kraus_ops() {
            let coeffs = pauli_coefficients(op);
            let nonzero = coeffs.iter().filter(|z| z.norm() > 1e-12).count();
            assert_eq!(nonzero, 1, "each Kraus operator is a single scaled Pauli");
        }
        assert!(kraus_to_chi(&ops).max_abs_diff(&chi) < 1e-12);

        let mut neg = DMatrix::zeros(4, 4);
        neg[(0, 0)] = c(1.1);
        neg[(1, 1)] = c(-0.1);
        assert!(matches!(
            chi_to_kraus(&ChiMatrix::new(1, neg).unwrap()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn choi_examples() {
        let id = choi_state(&KrausChannel::identity(1));
        assert!(id.max_abs_diff(&maximally_entangled_state(1).projector()) < 1e-15);

        let flip = choi_state(&KrausChannel::unitary(gates::x()).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let target = PureState::new(vec![ZERO, c(h), c(h), ZERO]).unwrap().projector();
        assert!(flip.max_abs_diff(&target) < 1e-15);
    }

    #[test]
    fn validity_examples() {
        let id = validate_channel(&ChiMatrix::unit(1, 0, 0).unwrap());
        assert!(id.all_hold());
        assert!(id.hermitian.value < 1e-12 && id.trace_preserving.value < 1e-12);

        let half = validate_channel(&ChiMatrix::unit(1, 0, 0).unwrap().scaled(0.5));
        assert!(!half.trace_preserving.holds);
        assert!((half.trace_preserving.value - 0.5).abs() < 1e-12);
        assert!(half.hermitian.holds && half.completely_positive.holds);

        assert!(validate_channel(&kraus_to_chi(&amplitude_damping(0.3))).all_hold());
    }

    #[test]
    fn csv_roundtrip() {
        let chi = kraus_to_chi(&amplitude_damping(0.3));
        let csv = chi.to_csv();
        assert!(csv.starts_with("m,n,label_m,label_n,re,im\n0,0,I,I,"));
        assert_eq!(csv.lines().count(), 17);
        assert!(ChiMatrix::from_csv(&csv).unwrap().max_abs_diff(&chi) < 1e-15);
    }

    #[test]
    fn composition_and_tensor() {
        let x = KrausChannel::unitary(gates::x()).unwrap();
        let twice = x.then(&x).unwrap();
        assert!(kraus_to_chi(&twice).max_abs_diff(&ChiMatrix::unit(1, 0, 0).unwrap()) < 1e-15);
        let xz = x.tensor(&KrausChannel::unitary(gates::z()).unwrap());
        assert_eq!(xz.num_qubits(), 2);
        let label: PauliLabel = "XZ".parse().unwrap();
        let idx = label.index();
        assert!(kraus_to_chi(&xz).max_abs_diff(&ChiMatrix::unit(2, idx, idx).unwrap()) < 1e-15);
    }

    #[test]
    fn random_channels_are_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n, r) in [(1, 1), (1, 3), (2, 4)] {
            let ch = random_channel(n, r, &mut rng);
            assert!(ch.completeness_residual() < 1e-12);
            assert_eq!(ch.kraus_ops().len(), r);
        }
    }
}
