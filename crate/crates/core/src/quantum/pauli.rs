use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{gates::Mat2, C64, I, ONE, ZERO};
use crate::{Error, Result};

/// One of `{I, σ₁, σ₂, σ₃}`, indexed 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn from_index(k: usize) -> Result<Self> {
        Self::ALL.get(k).copied().ok_or(Error::InvalidAxis(k))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> Mat2 {
        match self {
            PauliAxis::I => Mat2::IDENTITY,
            PauliAxis::X => Mat2::new(ZERO, ONE, ONE, ZERO),
            PauliAxis::Y => Mat2::new(ZERO, -I, I, ZERO),
            PauliAxis::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    /// Does the matrix flip the computational basis bit?
    fn flips(self) -> bool {
        matches!(self, PauliAxis::X | PauliAxis::Y)
    }

    /// Phase picked up when acting on basis bit `bit`.
    fn phase(self, bit: bool) -> C64 {
        match (self, bit) {
            (PauliAxis::I | PauliAxis::X, _) => ONE,
            (PauliAxis::Y, false) => I,
            (PauliAxis::Y, true) => -I,
            (PauliAxis::Z, false) => ONE,
            (PauliAxis::Z, true) => -ONE,
        }
    }
}

impl TryFrom<char> for PauliAxis {
    type Error = Error;
    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' | '0' => Ok(PauliAxis::I),
            'X' | '1' => Ok(PauliAxis::X),
            'Y' | '2' => Ok(PauliAxis::Y),
            'Z' | '3' => Ok(PauliAxis::Z),
            _ => Err(Error::InvalidArgument(format!("not a Pauli symbol: {c:?}"))),
        }
    }
}

/// Tensor product `σ_{i₁} ⊗ ⋯ ⊗ σ_{iₙ}`, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<PauliAxis>);

impl PauliString {
    pub fn new(axes: Vec<PauliAxis>) -> Self {
        PauliString(axes)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![PauliAxis::I; n])
    }

    /// `axis` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, axis: PauliAxis) -> Result<Self> {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, qubits: n });
        }
        let mut axes = vec![PauliAxis::I; n];
        axes[q] = axis;
        Ok(PauliString(axes))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.0
    }

    /// Bit mask of flipped basis bits under big-endian ordering.
    pub(crate) fn flip_mask(&self) -> usize {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, a)| a.flips())
            .fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// Phase of `P|j⟩ = phase(j)·|j ⊕ mask⟩`.
    pub(crate) fn phase_on(&self, basis: usize) -> C64 {
        let n = self.0.len();
        self.0.iter().enumerate().fold(ONE, |acc, (q, a)| {
            if *a == PauliAxis::I {
                acc
            } else {
                acc * a.phase(basis >> (n - 1 - q) & 1 == 1)
            }
        })
    }

    /// Dense `2^n × 2^n` matrix (Kronecker product of the factors).
    pub fn matrix(&self) -> nalgebra::DMatrix<C64> {
        let dim = 1usize << self.0.len();
        let mask = self.flip_mask();
        let mut m = nalgebra::DMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            m[(j ^ mask, j)] = self.phase_on(j);
        }
        m
    }

    /// Every string of length `n`, lexicographic in axis index.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |code| {
            PauliString(
                (0..n)
                    .map(|q| PauliAxis::ALL[(code >> (2 * (n - 1 - q))) & 3])
                    .collect(),
            )
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{}", a.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars().map(PauliAxis::try_from).collect::<Result<Vec<_>>>().map(PauliString)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::dense;

    #[test]
    fn string_matrix_matches_kronecker() {
        for s in PauliString::all(3) {
            let kron = s
                .axes()
                .iter()
                .fold(dense::identity(0), |acc, a| dense::kron(&acc, &dense::from_mat2(&a.matrix())));
            assert!(crate::quantum::max_abs(&(s.matrix() - kron)) < 1e-15, "{s}");
        }
    }

    #[test]
    fn parse_and_display() {
        let s: PauliString = "IXyZ".parse().unwrap();
        assert_eq!(s.to_string(), "IXYZ");
        assert!("IQ".parse::<PauliString>().is_err());
        assert!(PauliAxis::from_index(4).is_err());
        assert_eq!(PauliAxis::from_index(2).unwrap(), PauliAxis::Y);
    }
}
