use std::f64::consts::FRAC_PI_2;

use ndarray::Array2;

use super::circuit::{Circuit, PreGate, VqcParams};
use crate::quantum::{dense, pauli_expand, rotation_gate, DensityMatrix, Mat2, PauliAxis, PauliString, StateVector, C64, I};
use crate::{Error, Result};

/// `∂f ≈ scale · (f(x + shift) − f(x − shift))`; exact for rotation gates at
/// the default `shift = π/2`, `scale = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRule {
    pub shift: f64,
    pub scale: f64,
}

impl Default for ShiftRule {
    fn default() -> Self {
        ShiftRule { shift: FRAC_PI_2, scale: 0.5 }
    }
}

/// Expectations plus both shift-rule Jacobians at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftGradients {
    pub values: Vec<f64>,
    /// `m × n`, with respect to the raw (pre-scaling) input.
    pub input: Array2<f64>,
    /// `m × nL`
    pub params: Array2<f64>,
}

/// `∂⟨Q_i⟩/∂x_q` by shifting each encoding angle by ±π/2.
pub fn grad_input_shift(x: &[f64], theta: &VqcParams, circuit: &Circuit) -> Result<Array2<f64>> {
    grad_input_shift_with(ShiftRule::default(), x, theta, circuit)
}

pub fn grad_input_shift_with(rule: ShiftRule, x: &[f64], theta: &VqcParams, circuit: &Circuit) -> Result<Array2<f64>> {
    circuit.check_input(x, theta)?;
    let angles = circuit.encoding.angles(x);
    let chain = circuit.encoding.angle_derivatives(x);
    let mut out = Array2::zeros((circuit.num_outputs(), circuit.qubits()));
    let mut shifted = angles.clone();
    for q in 0..circuit.qubits() {
        if circuit.encoding.axes[q] == PauliAxis::I {
            continue;
        }
        shifted[q] = angles[q] + rule.shift;
        let plus = circuit.expectations_at(&shifted, theta)?;
        shifted[q] = angles[q] - rule.shift;
        let minus = circuit.expectations_at(&shifted, theta)?;
        shifted[q] = angles[q];
        for (i, (p, m)) in plus.iter().zip(&minus).enumerate() {
            out[(i, q)] = rule.scale * (p - m) * chain[q];
        }
    }
    Ok(out)
}

/// `∂⟨Q_i⟩/∂θ_q^ℓ` by the parameter-shift rule; columns ordered like [`VqcParams`].
pub fn grad_params_shift(x: &[f64], theta: &VqcParams, circuit: &Circuit) -> Result<Array2<f64>> {
    circuit.check_input(x, theta)?;
    let encoded = circuit.encode_angles(&circuit.encoding.angles(x));
    params_jacobian(ShiftRule::default(), circuit, &encoded, theta)
}

fn params_jacobian(rule: ShiftRule, circuit: &Circuit, encoded: &StateVector, theta: &VqcParams) -> Result<Array2<f64>> {
    let n = circuit.qubits();
    let mut out = Array2::zeros((circuit.num_outputs(), circuit.num_params()));
    let mut shifted = theta.clone();
    for p in 0..theta.len() {
        if circuit.ansatz.blocks[p / n].axes[p % n] == PauliAxis::I {
            continue;
        }
        let mut eval = |delta: f64| -> Result<Vec<f64>> {
            shifted.0[p] = theta.0[p] + delta;
            let mut s = encoded.clone();
            circuit.ansatz.apply(&mut s, &shifted)?;
            Ok(circuit.measure(&s))
        };
        let plus = eval(rule.shift)?;
        let minus = eval(-rule.shift)?;
        shifted.0[p] = theta.0[p];
        for (i, (a, b)) in plus.iter().zip(&minus).enumerate() {
            out[(i, p)] = rule.scale * (a - b);
        }
    }
    Ok(out)
}

/// Values and both shift Jacobians in one pass (the training path).
pub fn shift_gradients(x: &[f64], theta: &VqcParams, circuit: &Circuit) -> Result<ShiftGradients> {
    circuit.check_input(x, theta)?;
    let angles = circuit.encoding.angles(x);
    let encoded = circuit.encode_angles(&angles);
    let mut s = encoded.clone();
    circuit.ansatz.apply(&mut s, theta)?;
    Ok(ShiftGradients {
        values: circuit.measure(&s),
        input: grad_input_shift(x, theta, circuit)?,
        params: params_jacobian(ShiftRule::default(), circuit, &encoded, theta)?,
    })
}

/// Largest qubit count the Pauli-sum gradient accepts.
pub const ANALYTIC_MAX_QUBITS: usize = 8;

/// `∂⟨Q_i⟩/∂x_q` from the Pauli expansion of `ρ₀ = |0⋯0⟩⟨0⋯0|`:
///
/// `−(i/2) Σ C_{i₁⋯iₙ} tr{ U†QU · (V₁σ_{i₁}V₁†) ⊗ ⋯ ⊗ [σ_{k_q}, V_qσ_{i_q}V_q†] ⊗ ⋯ }`
///
/// with the bracket evaluated as `i(V_q(x+π/2)σV_q†(x+π/2) − V_q(x−π/2)σV_q†(x−π/2))`.
/// The traces of the tensor-product terms are contracted one qubit at a time,
/// sharing work between strings with a common prefix.
pub fn grad_input_analytic(x: &[f64], theta: &VqcParams, circuit: &Circuit) -> Result<Array2<f64>> {
    circuit.check_input(x, theta)?;
    let n = circuit.qubits();
    if n > ANALYTIC_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "analytic gradient is limited to {ANALYTIC_MAX_QUBITS} qubits, circuit has {n}"
        )));
    }
    let enc = &circuit.encoding;
    let angles = enc.angles(x);
    let chain = enc.angle_derivatives(x);
    let rho0 = pauli_expand(&DensityMatrix::from_state(&StateVector::zero(n)));

    // conjugated[r][i] = V_r σ_i V_r†
    let conjugated: Vec<[Mat2; 4]> = (0..n)
        .map(|r| {
            let v = enc.qubit_unitary(r, angles[r]);
            PauliAxis::ALL.map(|a| v.conjugate(&a.matrix()))
        })
        .collect();
    // bracket[q][i] = [σ_{k_q}, V_q σ_i V_q†] via the ±π/2 shift identity
    let bracket: Vec<[Mat2; 4]> = (0..n)
        .map(|q| {
            if enc.axes[q] == PauliAxis::I {
                return [Mat2::ZERO; 4];
            }
            let vp = enc.qubit_unitary(q, angles[q] + FRAC_PI_2);
            let vm = enc.qubit_unitary(q, angles[q] - FRAC_PI_2);
            PauliAxis::ALL.map(|a| (vp.conjugate(&a.matrix()) - vm.conjugate(&a.matrix())).scale(I))
        })
        .collect();

    let u = circuit.ansatz.matrix(theta)?;
    let u_dag = u.adjoint();
    let mut out = Array2::zeros((circuit.num_outputs(), n));
    for (i, obs) in circuit.observables.0.iter().enumerate() {
        let heisenberg = &u_dag * obs.matrix() * &u;
        // row-major copy of U†QU
        let o: Vec<C64> = heisenberg.transpose().as_slice().to_vec();
        for q in 0..n {
            if enc.axes[q] == PauliAxis::I {
                continue;
            }
            let factor = |r: usize, a: PauliAxis| if r == q { bracket[q][a.index()] } else { conjugated[r][a.index()] };
            let total = contract(&o, 1 << n, 0, rho0.terms(), &factor);
            let value = total * C64::new(0.0, -0.5);
            assert!(value.im.abs() < 1e-10, "imaginary residue {} in analytic gradient", value.im);
            out[(i, q)] = value.re * chain[q];
        }
    }
    Ok(out)
}

/// `Σ_s C_s · tr(T · ⊗_{r ≥ level} factor(r, s_r))` for the strings in `terms`
/// (all sharing the axes before `level`), with `T` a row-major `dim × dim`
/// operator on the remaining qubits.
fn contract(t: &[C64], dim: usize, level: usize, terms: &[(PauliString, C64)], factor: &dyn Fn(usize, PauliAxis) -> Mat2) -> C64 {
    if dim == 1 {
        debug_assert_eq!(terms.len(), 1);
        return t[0] * terms[0].1;
    }
    let half = dim / 2;
    let mut total = C64::new(0.0, 0.0);
    let mut start = 0;
    while start < terms.len() {
        let axis = terms[start].0.axes()[level];
        let end = start + terms[start..].iter().take_while(|(p, _)| p.axes()[level] == axis).count();
        let m = factor(level, axis).0;
        // reduced[a'][b'] = Σ_{a1,b1} T[(a1,a'),(b1,b')] · M[b1][a1]
        let mut reduced = vec![C64::new(0.0, 0.0); half * half];
        for a1 in 0..2 {
            for b1 in 0..2 {
                let w = m[b1][a1];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for ar in 0..half {
                    let src = &t[(a1 * half + ar) * dim + b1 * half..][..half];
                    let dst = &mut reduced[ar * half..][..half];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * w;
                    }
                }
            }
        }
        total += contract(&reduced, half, level + 1, &terms[start..end], factor);
        start = end;
    }
    total
}

/// Max entrywise deviation between `[σ_k, V σ_i V†]` and
/// `i(V(x+π/2) σ_i V†(x+π/2) − V(x−π/2) σ_i V†(x−π/2))`, `V(x) = R_k(x)·H`.
pub fn lie_bracket_check(k: PauliAxis, i: PauliAxis, angle: f64, pre_gate: PreGate) -> Result<f64> {
    let v = |a: f64| -> Result<Mat2> { Ok(rotation_gate(k, a)? * pre_gate.matrix()) };
    let sigma_i = i.matrix();
    let lhs = k.matrix().commutator(&v(angle)?.conjugate(&sigma_i));
    let rhs = (v(angle + FRAC_PI_2)?.conjugate(&sigma_i) - v(angle - FRAC_PI_2)?.conjugate(&sigma_i)).scale(I);
    Ok(lhs.max_abs_diff(&rhs))
}

/// Dense `V(x)` for the encoding (reference path for tests).
pub fn encoding_matrix(circuit: &Circuit, x: &[f64]) -> nalgebra::DMatrix<C64> {
    let angles = circuit.encoding.angles(x);
    let factors: Vec<Mat2> = (0..circuit.qubits()).map(|q| circuit.encoding.qubit_unitary(q, angles[q])).collect();
    dense::tensor_product(&factors)
}
