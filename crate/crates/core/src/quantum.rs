//! Dense complex linear algebra and quantum-state primitives.
//!
//! Qubit ordering: qubit 0 is the most significant bit of a computational
//! basis index, so `tensor(a, b)` places `a` on the leading qubits.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Tolerance below which a unitary is rejected by [`apply_unitary`].
pub const UNITARY_TOL: f64 = 1e-8;
/// Smallest eigenvalue a density matrix may carry.
pub const PSD_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Returns `n` when `dim == 2^n`.
pub fn qubit_count(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

/// A square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows().max(1),
                actual: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
        }
        Ok(Self(DMatrix::from_fn(d, d, |i, j| rows[i][j])))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let d = entries.len();
        Self(DMatrix::from_fn(d, d, |i, j| if i == j { entries[i] } else { ZERO }))
    }

    /// `|psi><phi|`
    pub fn outer(psi: &PureState, phi: &PureState) -> Self {
        Self(psi.vector() * phi.vector().adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn tensor(&self, other: &Operator) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn apply(&self, psi: &PureState) -> DVector<C64> {
        &self.0 * psi.vector()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |U†U - I|` entrywise.
    pub fn unitarity_residual(&self) -> f64 {
        (self.dagger() * self).max_abs_diff(&Operator::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut vals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Eigenpairs of the Hermitian part, eigenvectors as columns.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let herm = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Mul<&Operator> for Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(self.0 * &rhs.0)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

/// Kronecker product: block `(i, j)` of the result is `a[i, j] * b`.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    a.tensor(b)
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

/// Standard single-qubit gates.
pub mod gates {
    use super::{Operator, C64, I, ONE, ZERO};

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
    }

    /// `[[0, -i], [i, 0]]`
    pub fn y() -> Operator {
        Operator::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap()
    }

    pub fn z() -> Operator {
        Operator::diagonal(&[ONE, -ONE])
    }

    pub fn hadamard() -> Operator {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Operator::from_rows(&[vec![h, h], vec![h, -h]]).unwrap()
    }

    /// `diag(1, i)`
    pub fn phase() -> Operator {
        Operator::diagonal(&[ONE, I])
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(DVector<C64>);

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(v: DVector<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm_sq = v.norm_squared();
        if (norm_sq - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sq} differs from 1"
            )));
        }
        Ok(Self(v))
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        Ok(Self(v / C64::new(norm, 0.0)))
    }

    /// Computational basis state `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, limit: dim });
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState(self.0.kronecker(&other.0))
    }

    /// Applies a unitary without re-checking normalization.
    pub(crate) fn evolve(&self, u: &Operator) -> PureState {
        PureState(u.matrix() * &self.0)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix(&self.0 * self.0.adjoint())
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates all three density-matrix invariants.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(m);
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        Self::new(op.into_matrix())
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "density matrix must be square");
        Self(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn to_operator(&self) -> Operator {
        Operator(self.0.clone())
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `Tr(rho * op)`
    pub fn expectation(&self, op: &Operator) -> C64 {
        assert_eq!(self.dim(), op.dim(), "operator dimension differs from state");
        // Tr(AB) = sum_ij A_ij B_ji
        let mut acc = ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.0[(i, j)] * op.matrix()[(j, i)];
            }
        }
        acc
    }

    /// `<phi| rho |psi>`
    pub fn matrix_element(&self, phi: &PureState, psi: &PureState) -> C64 {
        phi.vector().dotc(&(&self.0 * psi.vector()))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(self.0.kronecker(&other.0))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.to_operator().max_abs_diff(&other.to_operator())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_operator().hermitian_eigenvalues()[0]
    }

    pub fn validate(&self) -> Result<()> {
        let op = self.to_operator();
        let herm = op.hermiticity_residual();
        if herm > DEFAULT_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// `u rho u†`
pub fn apply_unitary(u: &Operator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if u.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: u.dim(),
        });
    }
    let residual = u.unitarity_residual();
    if residual > UNITARY_TOL {
        return Err(Error::NonUnitary { residual });
    }
    Ok(DensityMatrix(u.matrix() * rho.matrix() * u.matrix().adjoint()))
}

/// Which factor of a bipartite system survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Keep) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da * db != rho.dim() || da == 0 || db == 0 {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            actual: rho.dim(),
        });
    }
    let m = rho.matrix();
    let out = match keep {
        Keep::A => DMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Keep::B => DMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(DensityMatrix(out))
}

/// `|I> = sum_i |i>|i> / sqrt(D)` on two `n`-qubit registers.
pub fn maximally_entangled_state(n: usize) -> PureState {
    assert!(n >= 1, "maximally entangled state needs at least one qubit per register");
    let d = 1usize << n;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = DVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    PureState(v)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn haar_random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v = DVector::from_fn(d, |_, _| complex_gaussian(rng));
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix on R's diagonal.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Operator(q)
}

/// Random full-rank density matrix `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix(m / tr)
}
