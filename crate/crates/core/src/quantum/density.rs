use nalgebra::DMatrix;

use super::{Observable, PauliAxis, PauliString, StateVector, C64, ZERO};
use crate::{Error, Result};

const TOL: f64 = 1e-12;

/// `2^n × 2^n` Hermitian, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates shape, Hermiticity and trace (1e-12).
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!("density matrix must be 2^n square, got {}×{}", dim, m.ncols())));
        }
        let dev = crate::quantum::max_abs(&(&m - m.adjoint()));
        if dev > TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} ≠ 1")));
        }
        Ok(DensityMatrix { n: dim.trailing_zeros() as usize, m })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn from_state(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let m = DMatrix::from_fn(dim, dim, |r, c| amps[r] * amps[c].conj());
        DensityMatrix { n: state.qubits(), m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        let m = DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        DensityMatrix { n, m }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// `tr(ρ·P)` using the signed-permutation structure of `P`.
    fn trace_with(&self, p: &PauliString) -> C64 {
        let mask = p.flip_mask();
        (0..self.m.nrows()).map(|a| self.m[(a, a ^ mask)] * p.phase_on(a)).sum()
    }

    /// Reduced single-qubit state of qubit `q`.
    fn reduced(&self, q: usize) -> [[C64; 2]; 2] {
        let bit = 1usize << (self.n - 1 - q);
        let mut out = [[ZERO; 2]; 2];
        for j in 0..self.m.nrows() {
            if j & bit != 0 {
                continue;
            }
            out[0][0] += self.m[(j, j)];
            out[0][1] += self.m[(j, j | bit)];
            out[1][0] += self.m[(j | bit, j)];
            out[1][1] += self.m[(j | bit, j | bit)];
        }
        out
    }

    /// Detect `ρ = ⊗_q (I + s_q σ_{a_q})/2`; returns the `(a_q, s_q)` factors.
    fn pure_product_factors(&self) -> Option<Vec<(PauliAxis, f64)>> {
        let mut factors = Vec::with_capacity(self.n);
        for q in 0..self.n {
            let r = self.reduced(q);
            let bloch = [
                PauliAxis::X.matrix(),
                PauliAxis::Y.matrix(),
                PauliAxis::Z.matrix(),
            ]
            .map(|s| {
                let mut t = ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        t += r[i][j] * s.0[j][i];
                    }
                }
                t.re
            });
            let pole = bloch.iter().position(|v| (v.abs() - 1.0).abs() < TOL)?;
            if bloch.iter().enumerate().any(|(k, v)| k != pole && v.abs() > TOL) {
                return None;
            }
            factors.push((PauliAxis::ALL[pole + 1], bloch[pole].signum()));
        }
        let product = factors.iter().fold(DMatrix::identity(1, 1), |acc: DMatrix<C64>, &(a, s)| {
            let f = super::dense::from_mat2(&(super::Mat2::IDENTITY + a.matrix().scale(C64::new(s, 0.0))).scale(C64::new(0.5, 0.0)));
            acc.kronecker(&f)
        });
        (crate::quantum::max_abs(&(&product - &self.m)) <= TOL).then_some(factors)
    }
}

/// Coefficients `C_{i₁⋯iₙ}` of `ρ = Σ C·σ_{i₁}⊗⋯⊗σ_{iₙ}`, sorted by string.
/// Strings with an exactly zero coefficient are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliExpansion {
    n: usize,
    terms: Vec<(PauliString, C64)>,
}

impl PauliExpansion {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(PauliString, C64)] {
        &self.terms
    }

    pub fn coefficient(&self, p: &PauliString) -> C64 {
        self.terms
            .binary_search_by(|(s, _)| s.cmp(p))
            .map(|i| self.terms[i].1)
            .unwrap_or(ZERO)
    }

    /// `Σ C·σ⊗` as a dense matrix.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let dim = 1 << self.n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (p, c) in &self.terms {
            let mask = p.flip_mask();
            for j in 0..dim {
                m[(j ^ mask, j)] += c * p.phase_on(j);
            }
        }
        m
    }
}

/// Expand `ρ` in the Pauli tensor basis: `C = 2^{−n}·tr(ρ·σ_{i₁}⊗⋯⊗σ_{iₙ})`.
///
/// Products of `(I ± σ)/2` factors (e.g. basis states) get exact coefficients
/// `±2^{−n}` without evaluating any traces.
pub fn pauli_expand(rho: &DensityMatrix) -> PauliExpansion {
    let n = rho.qubits();
    let norm = 1.0 / (1u64 << n) as f64;
    let terms = match rho.pure_product_factors() {
        Some(factors) => {
            let mut terms: Vec<(PauliString, C64)> = (0..1usize << n)
                .map(|subset| {
                    let mut sign = 1.0;
                    let axes = factors
                        .iter()
                        .enumerate()
                        .map(|(q, &(a, s))| {
                            if subset >> (n - 1 - q) & 1 == 1 {
                                sign *= s;
                                a
                            } else {
                                PauliAxis::I
                            }
                        })
                        .collect();
                    (PauliString::new(axes), C64::new(sign * norm, 0.0))
                })
                .collect();
            terms.sort_by(|a, b| a.0.cmp(&b.0));
            terms
        }
        None => PauliString::all(n)
            .filter_map(|p| {
                let c = rho.trace_with(&p) * norm;
                (c != ZERO).then_some((p, c))
            })
            .collect(),
    };
    PauliExpansion { n, terms }
}

/// `tr(Q·U·ρ·U†)`.
pub fn expectation_density(rho: &DensityMatrix, u: &DMatrix<C64>, obs: &Observable) -> Result<f64> {
    let dim = rho.matrix().nrows();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: u.nrows() });
    }
    if obs.qubits() != rho.qubits() {
        return Err(Error::DimensionMismatch { expected: rho.qubits(), got: obs.qubits() });
    }
    let evolved = u * rho.matrix() * u.adjoint();
    let value = (obs.matrix() * evolved).trace();
    assert!(value.im.abs() < 1e-10, "imaginary residue {} in density expectation", value.im);
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{dense, hadamard, rotation_gate, Mat2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn half() -> C64 {
        C64::new(0.5, 0.0)
    }

    fn z(n: usize, q: usize) -> Observable {
        Observable::Pauli(PauliString::single(n, q, PauliAxis::Z).unwrap())
    }

    #[test]
    fn outer_products() {
        let rho = DensityMatrix::from_state(&StateVector::zero(1));
        assert_eq!(rho.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(rho.matrix()[(1, 1)], ZERO);
        let mut plus = StateVector::zero(1);
        plus.apply_gate(&hadamard(), 0).unwrap();
        let rho = DensityMatrix::from_state(&plus);
        assert!(rho.matrix().iter().all(|e| (e - half()).norm() < 1e-15));
        let rho = DensityMatrix::from_state(&StateVector::zero(2));
        assert_eq!(rho.matrix().iter().filter(|e| **e != ZERO).count(), 1);
        assert_eq!(rho.matrix()[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn expand_zero_state() {
        let e = pauli_expand(&DensityMatrix::from_state(&StateVector::zero(1)));
        assert_eq!(e.coefficient(&"I".parse().unwrap()), half());
        assert_eq!(e.coefficient(&"Z".parse().unwrap()), half());
        assert_eq!(e.coefficient(&"X".parse().unwrap()), ZERO);
        assert_eq!(e.coefficient(&"Y".parse().unwrap()), ZERO);
    }

    #[test]
    fn expand_maximally_mixed() {
        let e = pauli_expand(&DensityMatrix::maximally_mixed(1));
        assert_eq!(e.terms().len(), 1);
        assert!((e.coefficient(&"I".parse().unwrap()) - half()).norm() < 1e-16);
    }

    #[test]
    fn expand_two_qubit_zero() {
        let e = pauli_expand(&DensityMatrix::from_state(&StateVector::zero(2)));
        for p in PauliString::all(2) {
            let expected = if p.axes().iter().all(|a| matches!(a, PauliAxis::I | PauliAxis::Z)) { 0.25 } else { 0.0 };
            assert_eq!(e.coefficient(&p), C64::new(expected, 0.0), "{p}");
        }
    }

    #[test]
    fn fast_path_agrees_with_trace_formula() {
        // |+⟩ ⊗ |1⟩ ⊗ |−i⟩ is a product of (I ± σ)/2 factors
        let mut s = StateVector::zero(3);
        s.apply_gate(&hadamard(), 0).unwrap();
        s.apply_gate(&PauliAxis::X.matrix(), 1).unwrap();
        s.apply_gate(&rotation_gate(PauliAxis::X, std::f64::consts::FRAC_PI_2).unwrap(), 2).unwrap();
        let rho = DensityMatrix::from_state(&s);
        assert!(rho.pure_product_factors().is_some());
        let fast = pauli_expand(&rho);
        for p in PauliString::all(3) {
            let slow = rho.trace_with(&p) / 8.0;
            assert!((fast.coefficient(&p) - slow).norm() < 1e-15, "{p} {} {slow}", fast.coefficient(&p));
        }
        assert!(crate::quantum::max_abs(&(fast.reconstruct() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn rejects_bad_matrices() {
        let m = DMatrix::from_element(3, 3, ZERO);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Shape(_))));
        let mut m = DMatrix::from_element(2, 2, ZERO);
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn density_expectation_basics() {
        let rho = DensityMatrix::from_state(&StateVector::zero(1));
        assert_eq!(expectation_density(&rho, &dense::identity(1), &z(1, 0)).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(1);
        let u = dense::from_mat2(&rotation_gate(PauliAxis::Y, 0.9).unwrap());
        assert!(expectation_density(&mixed, &u, &z(1, 0)).unwrap().abs() < 1e-15);
        assert!(expectation_density(&rho, &dense::identity(2), &z(1, 0)).is_err());
    }

    #[test]
    fn density_path_matches_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let mut psi = StateVector::zero(n);
            let mut u = dense::identity(n);
            // random initial state from a few gates, then a random "U"
            for _ in 0..6 {
                let q = rng.random_range(0..n);
                let g = rotation_gate(PauliAxis::ALL[rng.random_range(1..4)], rng.random_range(-3.0..3.0)).unwrap();
                psi.apply_gate(&g, q).unwrap();
            }
            let rho = DensityMatrix::from_state(&psi);
            let mut evolved = psi.clone();
            for _ in 0..10 {
                if n > 1 && rng.random_bool(0.3) {
                    let c = rng.random_range(0..n);
                    let t = (c + rng.random_range(1..n)) % n;
                    evolved.apply_cnot(c, t).unwrap();
                    u = dense::cnot(n, c, t).unwrap() * u;
                } else {
                    let q = rng.random_range(0..n);
                    let g: Mat2 = rotation_gate(PauliAxis::ALL[rng.random_range(1..4)], rng.random_range(-3.0..3.0)).unwrap();
                    evolved.apply_gate(&g, q).unwrap();
                    u = dense::embed_single(n, &g, q).unwrap() * u;
                }
            }
            let q = rng.random_range(0..n);
            let a = crate::quantum::expectation(&evolved, &z(n, q)).unwrap();
            let b = expectation_density(&rho, &u, &z(n, q)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
