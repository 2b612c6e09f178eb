//! Variational quantum classifier: angle encoding, layered ansatz, Pauli
//! measurements, and gradients of the expectations with respect to both the
//! circuit input and the variational angles.
//!
//! Three input-gradient routes are available and are expected to agree:
//! the ±π/2 shift rule ([`grad_input_shift`], the production path), the
//! Pauli-expansion formula with Lie brackets ([`grad_input_analytic`]), and
//! central finite differences over [`run`] (tests only).

mod circuit;
mod gradient;

pub use circuit::{ansatz_unitary, encode, run, AnsatzSpec, Block, Circuit, EncodingSpec, ObservableSet, PreGate, VqcParams};
pub use gradient::{
    encoding_matrix, grad_input_analytic, grad_input_shift, grad_input_shift_with, grad_params_shift, lie_bracket_check,
    shift_gradients, ShiftGradients, ShiftRule, ANALYTIC_MAX_QUBITS,
};

#[cfg(test)]
mod tests;
