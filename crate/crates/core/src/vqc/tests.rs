use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gradcheck::{central_differences, random_circuit, relative_error, FD_STEP};
use crate::quantum::{dense, expectation_density, DensityMatrix, Observable, PauliAxis, PauliString, StateVector, C64};

fn one_qubit(axis: PauliAxis, pre: PreGate, blocks: usize, scaling: bool) -> Circuit {
    Circuit::new(
        EncodingSpec::uniform(1, axis, pre, scaling),
        AnsatzSpec::ring(1, blocks, PauliAxis::Y),
        ObservableSet::z_on_first(1, 1).unwrap(),
    )
    .unwrap()
}

#[test]
fn zero_input_gives_plus_states() {
    let spec = EncodingSpec::uniform(3, PauliAxis::Y, PreGate::Hadamard, false);
    let s = encode(&[0.0; 3], &spec).unwrap();
    let amp = FRAC_1_SQRT_2.powi(3);
    assert!(s.amplitudes().iter().all(|a| (a - C64::new(amp, 0.0)).norm() < 1e-15));
}

#[test]
fn ry_half_pi_after_hadamard_gives_one() {
    let spec = EncodingSpec::uniform(1, PauliAxis::Y, PreGate::Hadamard, false);
    let s = encode(&[FRAC_PI_2], &spec).unwrap();
    assert!(s.amplitudes()[0].norm() < 1e-15);
    assert!((s.amplitudes()[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn arctan_scaling_of_unit_feature() {
    let spec = EncodingSpec::uniform(1, PauliAxis::Y, PreGate::Identity, true);
    assert_abs_diff_eq!(spec.angles(&[1.0])[0], FRAC_PI_4, epsilon = 1e-15);
    assert!(encode(&[1.0, 2.0], &spec).is_err());
}

#[test]
fn empty_ansatz_is_identity() {
    let spec = AnsatzSpec::ring(3, 0, PauliAxis::Y);
    let mut s = StateVector::zero(3);
    s.apply_gate(&crate::quantum::hadamard(), 1).unwrap();
    assert_eq!(ansatz_unitary(&spec, &VqcParams::zeros(0), &s).unwrap(), s);
}

#[test]
fn zero_angle_block_is_bare_cnot() {
    let spec = AnsatzSpec::ring(2, 1, PauliAxis::Y);
    let u = spec.matrix(&VqcParams::zeros(2)).unwrap();
    assert!(crate::quantum::max_abs(&(u - dense::cnot(2, 0, 1).unwrap())) < 1e-15);
}

#[test]
fn ansatz_matches_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = AnsatzSpec {
        qubits: 3,
        blocks: vec![
            Block { axes: vec![PauliAxis::X, PauliAxis::Y, PauliAxis::Z], entangler: vec![(0, 1), (2, 0)] },
            Block { axes: vec![PauliAxis::Y, PauliAxis::Z, PauliAxis::X], entangler: vec![(1, 2)] },
        ],
    };
    let theta = VqcParams((0..6).map(|_| rng.random_range(-3.0..3.0)).collect());
    let mut oracle = dense::identity(3);
    for (l, b) in spec.blocks.iter().enumerate() {
        for &(c, t) in &b.entangler {
            oracle = dense::cnot(3, c, t).unwrap() * oracle;
        }
        let rot: Vec<_> = (0..3).map(|q| crate::quantum::rotation_gate(b.axes[q], theta.get(l, q, 3)).unwrap()).collect();
        oracle = dense::tensor_product(&rot) * oracle;
    }
    assert!(crate::quantum::max_abs(&(spec.matrix(&theta).unwrap() - oracle)) < 1e-14);
}

#[test]
fn ansatz_shape_errors() {
    let spec = AnsatzSpec::ring(2, 1, PauliAxis::Y);
    assert!(ansatz_unitary(&spec, &VqcParams::zeros(3), &StateVector::zero(2)).is_err());
    let bad = AnsatzSpec { qubits: 2, blocks: vec![Block { axes: vec![PauliAxis::Y; 2], entangler: vec![(1, 1)] }] };
    assert!(ansatz_unitary(&bad, &VqcParams::zeros(2), &StateVector::zero(2)).is_err());
}

#[test]
fn single_qubit_closed_forms() {
    let c = one_qubit(PauliAxis::Y, PreGate::Identity, 0, false);
    for &x in &[-2.0, -0.3, 0.0, 0.8, 2.9] {
        let v = run(&[x], &VqcParams::zeros(0), &c).unwrap();
        assert_abs_diff_eq!(v[0], x.cos(), epsilon = 1e-15);
        let g = grad_input_shift(&[x], &VqcParams::zeros(0), &c).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -x.sin(), epsilon = 1e-15);
        let a = grad_input_analytic(&[x], &VqcParams::zeros(0), &c).unwrap();
        assert_abs_diff_eq!(a[(0, 0)], -x.sin(), epsilon = 1e-15);
    }
}

#[test]
fn zero_everything_measures_plus_one() {
    let c = Circuit::new(
        EncodingSpec::uniform(4, PauliAxis::Y, PreGate::Identity, false),
        AnsatzSpec::ring(4, 2, PauliAxis::Y),
        ObservableSet::z_on_first(4, 4).unwrap(),
    )
    .unwrap();
    let v = run(&[0.0; 4], &VqcParams::zeros(8), &c).unwrap();
    assert_eq!(v, vec![1.0; 4]);
}

#[test]
fn run_matches_density_matrix_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = Circuit::default_classifier(4, 4, 3).unwrap();
    let rho0 = DensityMatrix::from_state(&StateVector::zero(4));
    for _ in 0..10 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-4.0..4.0)).collect();
        let theta = VqcParams((0..16).map(|_| rng.random_range(-3.0..3.0)).collect());
        let u = c.ansatz.matrix(&theta).unwrap() * encoding_matrix(&c, &x);
        let v = run(&x, &theta, &c).unwrap();
        for (i, o) in c.observables.0.iter().enumerate() {
            assert_abs_diff_eq!(v[i], expectation_density(&rho0, &u, o).unwrap(), epsilon = 1e-12);
        }
    }
}

#[test]
fn identity_encoding_axis_gives_zero_column() {
    let mut c = Circuit::default_classifier(3, 2, 2).unwrap();
    c.encoding.axes[1] = PauliAxis::I;
    let x = [0.4, -1.1, 0.9];
    let theta = VqcParams(vec![0.3, -0.2, 1.0, 0.5, 0.7, -0.9]);
    for g in [grad_input_shift(&x, &theta, &c).unwrap(), grad_input_analytic(&x, &theta, &c).unwrap()] {
        assert!(g.column(1).iter().all(|v| *v == 0.0));
        assert!(g.column(0).iter().any(|v| v.abs() > 1e-6));
    }
}

#[test]
fn shift_matches_finite_differences_on_default_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let c = Circuit::default_classifier(4, 4, 2).unwrap();
    let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
    let theta = VqcParams((0..16).map(|_| rng.random_range(-3.0..3.0)).collect());
    let g = grad_input_shift(&x, &theta, &c).unwrap();
    let fd = central_differences(|p| run(p, &theta, &c).unwrap(), &x, FD_STEP);
    for ((i, q), v) in g.indexed_iter() {
        assert!(relative_error(*v, fd[i][q]) < 1e-6, "({i},{q}) {v} vs {}", fd[i][q]);
    }
}

#[test]
fn analytic_agrees_with_shift_on_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for t in 0..50 {
        let n = 1 + t % 4;
        let l = t % 5;
        let c = random_circuit(&mut rng, n, l);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let theta = VqcParams((0..c.num_params()).map(|_| rng.random_range(-3.0..3.0)).collect());
        let a = grad_input_analytic(&x, &theta, &c).unwrap();
        let s = grad_input_shift(&x, &theta, &c).unwrap();
        assert!((&a - &s).iter().all(|d| d.abs() < 1e-10), "trial {t}");
    }
}

#[test]
fn analytic_handles_dense_observables() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = Circuit::default_classifier(3, 2, 1).unwrap();
    // random Hermitian observable
    let m = nalgebra::DMatrix::from_fn(8, 8, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    c.observables = ObservableSet(vec![Observable::dense((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()]);
    let x = [0.2, 1.3, -0.7];
    let theta = VqcParams((0..6).map(|_| rng.random_range(-3.0..3.0)).collect());
    let a = grad_input_analytic(&x, &theta, &c).unwrap();
    let s = grad_input_shift(&x, &theta, &c).unwrap();
    assert!((&a - &s).iter().all(|d| d.abs() < 1e-10));
}

#[test]
fn analytic_rejects_large_circuits() {
    let c = Circuit::default_classifier(9, 1, 2).unwrap();
    assert!(grad_input_analytic(&[0.0; 9], &VqcParams::zeros(9), &c).is_err());
}

#[test]
fn bracket_identity_examples() {
    for angle in [-1.3, 0.0, 0.4, 2.5] {
        assert!(lie_bracket_check(PauliAxis::Z, PauliAxis::Z, angle, PreGate::Identity).unwrap() < 1e-15);
        assert!(lie_bracket_check(PauliAxis::Y, PauliAxis::Y, angle, PreGate::Identity).unwrap() < 1e-15);
    }
    assert!(lie_bracket_check(PauliAxis::I, PauliAxis::Z, 0.1, PreGate::Identity).is_err());
}

#[test]
fn bracket_identity_all_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
        for i in PauliAxis::ALL {
            for _ in 0..20 {
                let angle = rng.random_range(-6.3..6.3);
                for pre in [PreGate::Identity, PreGate::Hadamard] {
                    assert!(lie_bracket_check(k, i, angle, pre).unwrap() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn params_shift_closed_form() {
    // x = 0, no pre-gate, one R_y block: ⟨Z⟩ = cos θ
    let c = one_qubit(PauliAxis::Y, PreGate::Identity, 1, false);
    for &t in &[0.0, 0.6, -2.2] {
        let g = grad_params_shift(&[0.0], &VqcParams(vec![t]), &c).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -t.sin(), epsilon = 1e-15);
    }
    let g = grad_params_shift(&[0.0], &VqcParams(vec![0.0]), &c).unwrap();
    assert_eq!(g[(0, 0)], 0.0);
}

#[test]
fn params_shift_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let c = random_circuit(&mut rng, 4, 3);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let theta: Vec<f64> = (0..c.num_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = grad_params_shift(&x, &VqcParams(theta.clone()), &c).unwrap();
        let fd = central_differences(|p| run(&x, &VqcParams(p.to_vec()), &c).unwrap(), &theta, FD_STEP);
        for ((i, p), v) in g.indexed_iter() {
            assert!(relative_error(*v, fd[i][p]) < 1e-6);
        }
    }
}

#[test]
fn combined_shift_gradients_match_individual_calls() {
    let c = Circuit::default_classifier(3, 2, 2).unwrap();
    let x = [0.5, -0.25, 2.0];
    let theta = VqcParams(vec![0.1, 0.2, 0.3, -0.4, -0.5, 0.6]);
    let all = shift_gradients(&x, &theta, &c).unwrap();
    assert_eq!(all.values, run(&x, &theta, &c).unwrap());
    assert_eq!(all.input, grad_input_shift(&x, &theta, &c).unwrap());
    assert_eq!(all.params, grad_params_shift(&x, &theta, &c).unwrap());
}

#[test]
fn default_classifier_layout() {
    let c = Circuit::default_classifier(8, 4, 2).unwrap();
    assert_eq!(c.num_params(), 32);
    assert_eq!(c.ansatz.blocks[0].entangler, (0..8).map(|q| (q, (q + 1) % 8)).collect::<Vec<_>>());
    assert!(c.encoding.arctan_scaling);
    assert_eq!(c.observables.0[1], Observable::Pauli(PauliString::single(8, 1, PauliAxis::Z).unwrap()));
    assert!(Circuit::default_classifier(2, 1, 3).is_err());
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<Circuit>(&json).unwrap(), c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pauli_expectations_stay_in_range(seed in any::<u64>(), n in 1usize..=5, l in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, n, l);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let theta = VqcParams((0..c.num_params()).map(|_| rng.random_range(-7.0..7.0)).collect());
        for v in run(&x, &theta, &c).unwrap() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn arctan_chain_rule(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Circuit::default_classifier(3, 2, 2).unwrap();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let theta = VqcParams((0..6).map(|_| rng.random_range(-3.0..3.0)).collect());
        // gradient w.r.t. raw x equals gradient w.r.t. angle times 1/(1+x²)
        let mut unscaled = c.clone();
        unscaled.encoding.arctan_scaling = false;
        let angles: Vec<f64> = x.iter().map(|v| v.atan()).collect();
        let by_angle = grad_input_shift(&angles, &theta, &unscaled).unwrap();
        let by_raw = grad_input_shift(&x, &theta, &c).unwrap();
        let fd = central_differences(|p| run(p, &theta, &c).unwrap(), &x, FD_STEP);
        for ((i, q), v) in by_raw.indexed_iter() {
            prop_assert!((v - by_angle[(i, q)] / (1.0 + x[q] * x[q])).abs() < 1e-14);
            prop_assert!(relative_error(*v, fd[i][q]) < 1e-6);
        }
    }
}
