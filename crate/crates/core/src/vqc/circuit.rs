use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quantum::{expectation, hadamard, rotation_gate, Mat2, Observable, PauliAxis, PauliString, StateVector, C64};
use crate::{Error, Result};

/// Fixed single-qubit gate applied before the encoding rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreGate {
    Identity,
    Hadamard,
}

impl PreGate {
    pub fn matrix(self) -> Mat2 {
        match self {
            PreGate::Identity => Mat2::IDENTITY,
            PreGate::Hadamard => hadamard(),
        }
    }
}

/// `V(x) = ⊗_q exp(−i x_q σ_{k_q}/2) · H_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub axes: Vec<PauliAxis>,
    pub pre_gates: Vec<PreGate>,
    /// Map raw features through `arctan` before using them as angles.
    pub arctan_scaling: bool,
}

impl EncodingSpec {
    pub fn uniform(n: usize, axis: PauliAxis, pre_gate: PreGate, arctan_scaling: bool) -> Self {
        EncodingSpec { axes: vec![axis; n], pre_gates: vec![pre_gate; n], arctan_scaling }
    }

    pub fn qubits(&self) -> usize {
        self.axes.len()
    }

    /// Rotation angle for each raw feature.
    pub fn angles(&self, x: &[f64]) -> Vec<f64> {
        if self.arctan_scaling {
            x.iter().map(|v| v.atan()).collect()
        } else {
            x.to_vec()
        }
    }

    /// `d angle / d x` per feature.
    pub fn angle_derivatives(&self, x: &[f64]) -> Vec<f64> {
        if self.arctan_scaling {
            x.iter().map(|v| 1.0 / (1.0 + v * v)).collect()
        } else {
            vec![1.0; x.len()]
        }
    }

    /// Per-qubit encoding unitary `V_q(angle) = R_{k_q}(angle)·H_q`.
    pub fn qubit_unitary(&self, q: usize, angle: f64) -> Mat2 {
        let pre = self.pre_gates[q].matrix();
        match self.axes[q] {
            PauliAxis::I => pre,
            axis => rotation_gate(axis, angle).expect("non-identity axis") * pre,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Shape("encoding needs at least one qubit".into()));
        }
        if self.pre_gates.len() != self.axes.len() {
            return Err(Error::Shape(format!(
                "encoding has {} axes but {} pre-gates",
                self.axes.len(),
                self.pre_gates.len()
            )));
        }
        Ok(())
    }
}

/// One ansatz block: entangling CNOTs, then one rotation per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub axes: Vec<PauliAxis>,
    /// `(control, target)` pairs, applied in order.
    pub entangler: Vec<(usize, usize)>,
}

/// `U(θ) = ∏_ℓ (⊗_q exp(−i θ_q^ℓ σ_q^ℓ /2)) ∘ C_ℓ`, block 0 applied first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub qubits: usize,
    pub blocks: Vec<Block>,
}

impl AnsatzSpec {
    /// `blocks` copies of: CNOT ring `0→1, 1→2, …, (n−1)→0`, then `axis` rotations.
    pub fn ring(n: usize, blocks: usize, axis: PauliAxis) -> Self {
        let entangler = match n {
            1 => Vec::new(),
            2 => vec![(0, 1)],
            _ => (0..n).map(|q| (q, (q + 1) % n)).collect(),
        };
        AnsatzSpec {
            qubits: n,
            blocks: (0..blocks).map(|_| Block { axes: vec![axis; n], entangler: entangler.clone() }).collect(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.qubits * self.blocks.len()
    }

    fn validate(&self) -> Result<()> {
        for (l, b) in self.blocks.iter().enumerate() {
            if b.axes.len() != self.qubits {
                return Err(Error::Shape(format!("block {l} has {} axes for {} qubits", b.axes.len(), self.qubits)));
            }
            for &(c, t) in &b.entangler {
                if c == t {
                    return Err(Error::SameControlTarget(c));
                }
                if c >= self.qubits || t >= self.qubits {
                    return Err(Error::QubitOutOfRange { index: c.max(t), qubits: self.qubits });
                }
            }
        }
        Ok(())
    }

    /// Apply `U(θ)` in place.
    pub fn apply(&self, state: &mut StateVector, theta: &VqcParams) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::DimensionMismatch { expected: self.num_params(), got: theta.len() });
        }
        if state.qubits() != self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, got: state.qubits() });
        }
        for (l, block) in self.blocks.iter().enumerate() {
            for &(c, t) in &block.entangler {
                state.apply_cnot(c, t)?;
            }
            for (q, &axis) in block.axes.iter().enumerate() {
                if axis != PauliAxis::I {
                    state.apply_gate(&rotation_gate(axis, theta.get(l, q, self.qubits))?, q)?;
                }
            }
        }
        Ok(())
    }

    /// Dense `U(θ)`, built column by column with the statevector kernel.
    pub fn matrix(&self, theta: &VqcParams) -> Result<DMatrix<C64>> {
        let dim = 1usize << self.qubits;
        let mut u = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for col in 0..dim {
            let mut s = StateVector::basis(self.qubits, col)?;
            self.apply(&mut s, theta)?;
            u.set_column(col, &nalgebra::DVector::from_column_slice(s.amplitudes()));
        }
        Ok(u)
    }
}

/// Variational angles, stored block-major: `θ[ℓ·n + q]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqcParams(pub Vec<f64>);

impl VqcParams {
    pub fn zeros(len: usize) -> Self {
        VqcParams(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, block: usize, qubit: usize, n: usize) -> f64 {
        self.0[block * n + qubit]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The measured operators `Q₁, …, Q_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet(pub Vec<Observable>);

impl ObservableSet {
    /// Pauli-Z on qubits `0..m`.
    pub fn z_on_first(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::Shape(format!("{m} single-qubit Z observables need at least {m} qubits, have {n}")));
        }
        (0..m)
            .map(|q| PauliString::single(n, q, PauliAxis::Z).map(Observable::Pauli))
            .collect::<Result<Vec<_>>>()
            .map(ObservableSet)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Encoding, ansatz and observables of one classifier circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub encoding: EncodingSpec,
    pub ansatz: AnsatzSpec,
    pub observables: ObservableSet,
}

impl Circuit {
    pub fn new(encoding: EncodingSpec, ansatz: AnsatzSpec, observables: ObservableSet) -> Result<Self> {
        let c = Circuit { encoding, ansatz, observables };
        c.validate()?;
        Ok(c)
    }

    /// Default classifier layout: Hadamard pre-gates, `R_y` encoding with
    /// arctan scaling, `blocks` ring-CNOT + `R_y` blocks, `Z` on the first
    /// `classes` qubits.
    pub fn default_classifier(n: usize, blocks: usize, classes: usize) -> Result<Self> {
        Circuit::new(
            EncodingSpec::uniform(n, PauliAxis::Y, PreGate::Hadamard, true),
            AnsatzSpec::ring(n, blocks, PauliAxis::Y),
            ObservableSet::z_on_first(n, classes)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.encoding.validate()?;
        self.ansatz.validate()?;
        let n = self.encoding.qubits();
        if self.ansatz.qubits != n {
            return Err(Error::Shape(format!("ansatz on {} qubits, encoding on {n}", self.ansatz.qubits)));
        }
        if self.observables.is_empty() {
            return Err(Error::Shape("circuit needs at least one observable".into()));
        }
        if let Some(o) = self.observables.0.iter().find(|o| o.qubits() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: o.qubits() });
        }
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.encoding.qubits()
    }

    pub fn num_params(&self) -> usize {
        self.ansatz.num_params()
    }

    pub fn num_outputs(&self) -> usize {
        self.observables.len()
    }

    /// Product state `V(angles)|0⋯0⟩` for already-scaled angles.
    pub(crate) fn encode_angles(&self, angles: &[f64]) -> StateVector {
        let mut s = StateVector::zero(self.qubits());
        for (q, &a) in angles.iter().enumerate() {
            s.apply_gate(&self.encoding.qubit_unitary(q, a), q).expect("qubit in range");
        }
        s
    }

    pub(crate) fn measure(&self, state: &StateVector) -> Vec<f64> {
        self.observables
            .0
            .iter()
            .map(|o| expectation(state, o).expect("validated dimensions"))
            .collect()
    }

    /// Expectations for already-scaled angles.
    pub(crate) fn expectations_at(&self, angles: &[f64], theta: &VqcParams) -> Result<Vec<f64>> {
        let mut s = self.encode_angles(angles);
        self.ansatz.apply(&mut s, theta)?;
        Ok(self.measure(&s))
    }

    pub(crate) fn check_input(&self, x: &[f64], theta: &VqcParams) -> Result<()> {
        if x.len() != self.qubits() {
            return Err(Error::DimensionMismatch { expected: self.qubits(), got: x.len() });
        }
        if theta.len() != self.num_params() {
            return Err(Error::DimensionMismatch { expected: self.num_params(), got: theta.len() });
        }
        Ok(())
    }
}

/// `V(x)|0⋯0⟩`, applying arctan scaling first when enabled.
pub fn encode(x: &[f64], spec: &EncodingSpec) -> Result<StateVector> {
    spec.validate()?;
    if x.len() != spec.qubits() {
        return Err(Error::DimensionMismatch { expected: spec.qubits(), got: x.len() });
    }
    let mut s = StateVector::zero(spec.qubits());
    for (q, a) in spec.angles(x).into_iter().enumerate() {
        s.apply_gate(&spec.qubit_unitary(q, a), q)?;
    }
    Ok(s)
}

/// Apply `U(θ)` to a copy of `state`.
pub fn ansatz_unitary(spec: &AnsatzSpec, theta: &VqcParams, state: &StateVector) -> Result<StateVector> {
    spec.validate()?;
    let mut s = state.clone();
    spec.apply(&mut s, theta)?;
    Ok(s)
}

/// `(⟨Q₁⟩, …, ⟨Q_m⟩)` for raw input `x`.
pub fn run(x: &[f64], theta: &VqcParams, circuit: &Circuit) -> Result<Vec<f64>> {
    circuit.check_input(x, theta)?;
    circuit.expectations_at(&circuit.encoding.angles(x), theta)
}
