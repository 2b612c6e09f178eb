//! Dense simulation primitives: pure states, density matrices, Pauli algebra,
//! gate application and expectation values.
//!
//! Qubits are numbered from 0 and ordered big-endian: qubit 0 is the most
//! significant bit of a basis index, so `|q0 q1 … q(n-1)⟩` lists the basis
//! states `|00…0⟩, |00…1⟩, …, |11…1⟩` in index order.
//!
//! Gates are applied in place by strided index arithmetic. The [`dense`]
//! module builds full `2^n × 2^n` Kronecker products and exists only as an
//! independent reference for tests and for the density-matrix path.

mod density;
pub mod dense;
mod gates;
mod observable;
mod pauli;
mod state;

pub use density::{expectation_density, pauli_expand, DensityMatrix, PauliExpansion};
pub use gates::{hadamard, rotation_gate, Mat2};
pub use observable::{expectation, Observable};
pub use pauli::{PauliAxis, PauliString};
pub use state::{apply_cnot, apply_single_qubit_gate, StateVector};

pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &nalgebra::DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
