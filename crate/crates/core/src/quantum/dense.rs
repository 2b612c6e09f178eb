//! Reference dense constructions (`2^n × 2^n` Kronecker products).
//!
//! Nothing on the simulation hot path uses these; they back the
//! density-matrix expectation path and the test oracles.

use nalgebra::DMatrix;

use super::{gates::Mat2, C64, ONE, ZERO};
use crate::{Error, Result};

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(1 << n, 1 << n)
}

pub fn from_mat2(g: &Mat2) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[g.0[0][0], g.0[0][1], g.0[1][0], g.0[1][1]])
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `I ⊗ … ⊗ gate ⊗ … ⊗ I` with `gate` at qubit `q` (qubit 0 leftmost).
pub fn embed_single(n: usize, gate: &Mat2, q: usize) -> Result<DMatrix<C64>> {
    if q >= n {
        return Err(Error::QubitOutOfRange { index: q, qubits: n });
    }
    let left = identity(q);
    let right = identity(n - q - 1);
    Ok(kron(&kron(&left, &from_mat2(gate)), &right))
}

/// Product of per-qubit factors, qubit 0 leftmost.
pub fn tensor_product(factors: &[Mat2]) -> DMatrix<C64> {
    factors.iter().fold(identity(0), |acc, f| kron(&acc, &from_mat2(f)))
}

/// CNOT as `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
pub fn cnot(n: usize, control: usize, target: usize) -> Result<DMatrix<C64>> {
    if control == target {
        return Err(Error::SameControlTarget(control));
    }
    if let Some(&bad) = [control, target].iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { index: bad, qubits: n });
    }
    let p0 = Mat2::new(ONE, ZERO, ZERO, ZERO);
    let p1 = Mat2::new(ZERO, ZERO, ZERO, ONE);
    let x = Mat2::new(ZERO, ONE, ONE, ZERO);
    let mut off = vec![Mat2::IDENTITY; n];
    let mut on = vec![Mat2::IDENTITY; n];
    off[control] = p0;
    on[control] = p1;
    on[target] = x;
    Ok(tensor_product(&off) + tensor_product(&on))
}
