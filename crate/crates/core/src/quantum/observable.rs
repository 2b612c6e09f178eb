use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{PauliString, StateVector, C64};
use crate::{Error, Result};

/// Hermitian operator measured at the end of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableRepr", into = "ObservableRepr")]
pub enum Observable {
    Pauli(PauliString),
    Dense(DMatrix<C64>),
}

impl Observable {
    pub fn dense(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_power_of_two() || m.nrows() < 2 {
            return Err(Error::Shape(format!("observable must be 2^n square, got {}×{}", m.nrows(), m.ncols())));
        }
        let dev = crate::quantum::max_abs(&(&m - m.adjoint()));
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Observable::Dense(m))
    }

    pub fn qubits(&self) -> usize {
        match self {
            Observable::Pauli(p) => p.len(),
            Observable::Dense(m) => m.nrows().trailing_zeros() as usize,
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        match self {
            Observable::Pauli(p) => p.matrix(),
            Observable::Dense(m) => m.clone(),
        }
    }
}

/// `⟨ψ|Q|ψ⟩`. Panics if the quadratic form has an imaginary part above 1e-10,
/// which cannot happen for validated Hermitian observables.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    if obs.qubits() != state.qubits() {
        return Err(Error::DimensionMismatch { expected: state.qubits(), got: obs.qubits() });
    }
    let value = match obs {
        Observable::Pauli(p) => {
            let mask = p.flip_mask();
            let amps = state.amplitudes();
            amps.iter()
                .enumerate()
                .map(|(j, a)| amps[j ^ mask].conj() * p.phase_on(j) * a)
                .sum::<C64>()
        }
        Observable::Dense(m) => {
            let amps = state.amplitudes();
            let mut acc = C64::new(0.0, 0.0);
            for (r, ar) in amps.iter().enumerate() {
                let row: C64 = amps.iter().enumerate().map(|(c, ac)| m[(r, c)] * ac).sum();
                acc += ar.conj() * row;
            }
            acc
        }
    };
    // non-finite values pass through so training can report divergence
    assert!(!value.im.is_finite() || value.im.abs() < 1e-10, "imaginary residue {} in expectation", value.im);
    Ok(value.re)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ObservableRepr {
    Pauli(String),
    Dense { dim: usize, re: Vec<f64>, im: Vec<f64> },
}

impl From<Observable> for ObservableRepr {
    fn from(o: Observable) -> Self {
        match o {
            Observable::Pauli(p) => ObservableRepr::Pauli(p.to_string()),
            Observable::Dense(m) => {
                let dim = m.nrows();
                // row-major
                let t = m.transpose();
                ObservableRepr::Dense {
                    dim,
                    re: t.iter().map(|z| z.re).collect(),
                    im: t.iter().map(|z| z.im).collect(),
                }
            }
        }
    }
}

impl TryFrom<ObservableRepr> for Observable {
    type Error = Error;
    fn try_from(r: ObservableRepr) -> Result<Self> {
        match r {
            ObservableRepr::Pauli(s) => Ok(Observable::Pauli(s.parse()?)),
            ObservableRepr::Dense { dim, re, im } => {
                if re.len() != dim * dim || im.len() != dim * dim {
                    return Err(Error::Shape("dense observable entry count".into()));
                }
                let entries: Vec<C64> = re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect();
                Observable::dense(DMatrix::from_row_slice(dim, dim, &entries))
            }
        }
    }
}
