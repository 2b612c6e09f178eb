use super::{gates::Mat2, PauliString, C64, ONE, ZERO};
use crate::{Error, Result};

/// Pure n-qubit state as `2^n` complex amplitudes (big-endian qubit order).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0⋯0⟩`
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "a state needs at least one qubit");
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n);
        if index >= s.amps.len() {
            return Err(Error::DimensionMismatch { expected: s.amps.len(), got: index });
        }
        s.amps[0] = ZERO;
        s.amps[index] = ONE;
        Ok(s)
    }

    /// Wrap amplitudes; length must be a power of two ≥ 2 and norm 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: len.next_power_of_two().max(2), got: len });
        }
        let s = StateVector { n: len.trailing_zeros() as usize, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange { index: q, qubits: self.n })
        } else {
            Ok(())
        }
    }

    /// Apply `gate` to qubit `q` in place.
    pub fn apply_gate(&mut self, gate: &Mat2, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = 1usize << (self.n - 1 - q);
        let [[g00, g01], [g10, g11]] = gate.0;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = g00 * x + g01 * y;
                *b = g10 * x + g11 * y;
            }
        }
        Ok(())
    }

    /// Flip `target` wherever `control` is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::SameControlTarget(control));
        }
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        let cmask = 1usize << (self.n - 1 - control);
        let tmask = 1usize << (self.n - 1 - target);
        for j in 0..self.amps.len() {
            if j & cmask != 0 && j & tmask == 0 {
                self.amps.swap(j, j | tmask);
            }
        }
        Ok(())
    }

    /// `P|ψ⟩` for a Pauli string.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        if p.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: p.len() });
        }
        let mask = p.flip_mask();
        let mut out = vec![ZERO; self.amps.len()];
        for (j, a) in self.amps.iter().enumerate() {
            out[j ^ mask] = p.phase_on(j) * a;
        }
        Ok(StateVector { n: self.n, amps: out })
    }
}

/// Functional form of [`StateVector::apply_gate`].
pub fn apply_single_qubit_gate(state: &StateVector, gate: &Mat2, q: usize) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_gate(gate, q)?;
    Ok(out)
}

/// Functional form of [`StateVector::apply_cnot`].
pub fn apply_cnot(state: &StateVector, control: usize, target: usize) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_cnot(control, target)?;
    Ok(out)
}
