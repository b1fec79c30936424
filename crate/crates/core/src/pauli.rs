//! The n-qubit Pauli operator basis `{E_m}` with base-4 indexing.
//!
//! Letter encoding is `I -> 0, X -> 1, Y -> 2, Z -> 3`, with the first letter
//! (qubit 0) as the most significant base-4 digit. `E_0` is always the identity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quantum::{gates, Operator, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn digit(self) -> usize {
        self as usize
    }

    pub fn from_digit(d: usize) -> Pauli {
        Self::ALL[d & 3]
    }

    pub fn matrix(self) -> Operator {
        match self {
            Pauli::I => gates::identity(),
            Pauli::X => gates::x(),
            Pauli::Y => gates::y(),
            Pauli::Z => gates::z(),
        }
    }

    pub fn symbol(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.digit()]
    }

    /// Single-letter product `self * other = phase * result`.
    pub fn product(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::One, p),
            (a, b) if a == b => (Phase::One, I),
            (X, Y) => (Phase::PlusI, Z),
            (Y, Z) => (Phase::PlusI, X),
            (Z, X) => (Phase::PlusI, Y),
            (Y, X) => (Phase::MinusI, Z),
            (Z, Y) => (Phase::MinusI, X),
            (X, Z) => (Phase::MinusI, Y),
            _ => unreachable!(),
        }
    }
}

/// One of the four unit phases `{+1, +i, -1, -i}`, stored as a power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    fn power(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_power(p: u8) -> Phase {
        match p & 3 {
            0 => Phase::One,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn times(self, other: Phase) -> Phase {
        Phase::from_power(self.power() + other.power())
    }

    pub fn to_complex(self) -> C64 {
        match self {
            Phase::One => C64::new(1.0, 0.0),
            Phase::PlusI => C64::new(0.0, 1.0),
            Phase::MinusOne => C64::new(-1.0, 0.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }
}

/// An n-fold tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel {
    letters: Vec<Pauli>,
}

impl PauliLabel {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidLabel(String::new()));
        }
        Ok(Self { letters })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n],
        }
    }

    /// Label of basis element `E_index` on `n` qubits.
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        let limit = basis_size(n);
        if n == 0 || index >= limit {
            return Err(Error::IndexOutOfRange { index, limit });
        }
        let letters = (0..n)
            .map(|q| Pauli::from_digit(index >> (2 * (n - 1 - q))))
            .collect();
        Ok(Self { letters })
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn index(&self) -> usize {
        self.letters.iter().fold(0, |acc, p| (acc << 2) | p.digit())
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidLabel(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliLabel::new(letters).map_err(|_| Error::InvalidLabel(s.to_string()))
    }
}

impl Serialize for PauliLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Pauli label with one of the four unit phases.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub label: PauliLabel,
}

impl PhasedPauli {
    pub fn matrix(&self) -> Operator {
        pauli_matrix(&self.label).scale(self.phase.to_complex())
    }
}

/// `4^n`, the number of Pauli basis elements.
pub fn basis_size(n: usize) -> usize {
    1usize << (2 * n)
}

pub fn pauli_matrix(label: &PauliLabel) -> Operator {
    let mut letters = label.letters.iter();
    let first = letters.next().expect("labels are non-empty").matrix();
    letters.fold(first, |acc, p| acc.tensor(&p.matrix()))
}

/// All `4^n` basis matrices in index order.
pub fn pauli_basis(n: usize) -> Vec<Operator> {
    (0..basis_size(n))
        .map(|m| pauli_matrix(&PauliLabel::from_index(n, m).expect("index in range")))
        .collect()
}

pub fn pauli_product(a: &PauliLabel, b: &PauliLabel) -> Result<PhasedPauli> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::LengthMismatch(a.num_qubits(), b.num_qubits()));
    }
    let mut phase = Phase::One;
    let letters = a
        .letters
        .iter()
        .zip(&b.letters)
        .map(|(&x, &y)| {
            let (ph, p) = x.product(y);
            phase = phase.times(ph);
            p
        })
        .collect();
    Ok(PhasedPauli {
        phase,
        label: PauliLabel { letters },
    })
}

/// `Tr(E_a† E_b) = D δ_ab`, evaluated symbolically.
pub fn pauli_trace_inner(a: &PauliLabel, b: &PauliLabel) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::LengthMismatch(a.num_qubits(), b.num_qubits()));
    }
    Ok(if a == b {
        (1u64 << a.num_qubits()) as f64
    } else {
        0.0
    })
}
