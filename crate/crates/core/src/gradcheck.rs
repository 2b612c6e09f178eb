//! Gradient verification harnesses: the analytic / shift / finite-difference
//! triangle over random circuits, and the Lie-bracket shift identity sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::parallel::Execution;
use crate::quantum::{Observable, PauliAxis, PauliString};
use crate::vqc::{
    grad_input_analytic, grad_input_shift_with, lie_bracket_check, run, AnsatzSpec, Block, Circuit, EncodingSpec,
    ObservableSet, PreGate, ShiftRule, VqcParams,
};
use crate::Result;

/// Analytic vs shift, absolute.
pub const ANALYTIC_VS_SHIFT_TOL: f64 = 1e-10;
/// Either exact path vs central differences, relative.
pub const FD_REL_TOL: f64 = 1e-6;
/// Both sides of the bracket identity, absolute.
pub const BRACKET_TOL: f64 = 1e-12;
/// Central-difference step for circuit inputs.
pub const FD_STEP: f64 = 1e-5;
/// Denominator floor of [`relative_error`]. Below it entries are compared
/// absolutely, since central differences carry ~1e-11 absolute noise.
pub const REL_FLOOR: f64 = 1e-4;

/// `|a − b| / max(|a|, |b|, REL_FLOOR)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Central differences of `f: ℝⁿ → ℝᵐ`, returned row-major `m × n`.
pub fn central_differences(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut cols = Vec::with_capacity(x.len());
    for q in 0..x.len() {
        probe[q] = x[q] + h;
        let plus = f(&probe);
        probe[q] = x[q] - h;
        let minus = f(&probe);
        probe[q] = x[q];
        cols.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<_>>());
    }
    let m = cols.first().map_or(0, |c| c.len());
    (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// A random circuit with `n` qubits and `blocks` ansatz blocks. About one in
/// eight encoding axes is the identity, so the zero-column case is exercised.
pub fn random_circuit(rng: &mut impl Rng, n: usize, blocks: usize) -> Circuit {
    let axis = |rng: &mut dyn rand::RngCore| PauliAxis::ALL[rng.random_range(1..4)];
    let encoding = EncodingSpec {
        axes: (0..n).map(|_| if rng.random_bool(0.125) { PauliAxis::I } else { axis(rng) }).collect(),
        pre_gates: (0..n).map(|_| if rng.random_bool(0.5) { PreGate::Hadamard } else { PreGate::Identity }).collect(),
        arctan_scaling: rng.random_bool(0.5),
    };
    let ansatz = AnsatzSpec {
        qubits: n,
        blocks: (0..blocks)
            .map(|_| Block {
                axes: (0..n).map(|_| axis(rng)).collect(),
                entangler: if n < 2 {
                    Vec::new()
                } else {
                    (0..rng.random_range(1..=n))
                        .map(|_| {
                            let c = rng.random_range(0..n);
                            (c, (c + rng.random_range(1..n)) % n)
                        })
                        .collect()
                },
            })
            .collect(),
    };
    let m = rng.random_range(1..=n.min(3));
    let observables = ObservableSet(
        (0..m)
            .map(|_| {
                let mut axes: Vec<PauliAxis> = (0..n).map(|_| PauliAxis::ALL[rng.random_range(0..4)]).collect();
                if axes.iter().all(|a| *a == PauliAxis::I) {
                    axes[rng.random_range(0..n)] = PauliAxis::Z;
                }
                Observable::Pauli(PauliString::new(axes))
            })
            .collect(),
    );
    Circuit::new(encoding, ansatz, observables).expect("generated circuit is valid")
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstCase {
    pub trial: usize,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub circuit: Circuit,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleReport {
    pub trials: usize,
    pub max_analytic_vs_shift: f64,
    pub max_shift_vs_fd_rel: f64,
    pub max_analytic_vs_fd_rel: f64,
    pub passed: bool,
    /// The trial with the largest tolerance-normalised deviation.
    pub worst: Option<WorstCase>,
}

#[derive(Debug, Clone)]
pub struct TriangleConfig {
    pub qubits: Vec<usize>,
    pub blocks: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Rule used on the shift side. Anything but the default is a negative control.
    pub rule: ShiftRule,
    pub execution: Execution,
}

impl Default for TriangleConfig {
    fn default() -> Self {
        TriangleConfig {
            qubits: vec![4],
            blocks: vec![4],
            trials: 50,
            seed: 42,
            rule: ShiftRule::default(),
            execution: Execution::Parallel,
        }
    }
}

struct TrialResult {
    analytic_vs_shift: f64,
    shift_vs_fd: f64,
    analytic_vs_fd: f64,
    case: WorstCase,
}

/// Trial `t` uses `qubits[t % |qubits|]` and `blocks[(t / |qubits|) % |blocks|]`
/// and its own seeded generator, so results do not depend on scheduling.
pub fn oracle_triangle(cfg: &TriangleConfig) -> Result<TriangleReport> {
    let results = cfg.execution.map_range(cfg.trials, |t| -> Result<TrialResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let n = cfg.qubits[t % cfg.qubits.len()];
        let l = cfg.blocks[(t / cfg.qubits.len()) % cfg.blocks.len()];
        let circuit = random_circuit(&mut rng, n, l);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let theta = VqcParams((0..circuit.num_params()).map(|_| rng.random_range(-3.2..3.2)).collect());
        let analytic = grad_input_analytic(&x, &theta, &circuit)?;
        let shift = grad_input_shift_with(cfg.rule, &x, &theta, &circuit)?;
        let fd = central_differences(|p| run(p, &theta, &circuit).expect("valid shapes"), &x, FD_STEP);
        let mut r = TrialResult {
            analytic_vs_shift: 0.0,
            shift_vs_fd: 0.0,
            analytic_vs_fd: 0.0,
            case: WorstCase { trial: t, x: x.clone(), theta: theta.0.clone(), circuit: circuit.clone() },
        };
        for ((i, q), a) in analytic.indexed_iter() {
            let (s, f) = (shift[(i, q)], fd[i][q]);
            r.analytic_vs_shift = r.analytic_vs_shift.max((a - s).abs());
            r.shift_vs_fd = r.shift_vs_fd.max(relative_error(s, f));
            r.analytic_vs_fd = r.analytic_vs_fd.max(relative_error(*a, f));
        }
        Ok(r)
    });
    let mut report = TriangleReport {
        trials: cfg.trials,
        max_analytic_vs_shift: 0.0,
        max_shift_vs_fd_rel: 0.0,
        max_analytic_vs_fd_rel: 0.0,
        passed: true,
        worst: None,
    };
    let mut worst_score = f64::NEG_INFINITY;
    for r in results {
        let r = r?;
        report.max_analytic_vs_shift = report.max_analytic_vs_shift.max(r.analytic_vs_shift);
        report.max_shift_vs_fd_rel = report.max_shift_vs_fd_rel.max(r.shift_vs_fd);
        report.max_analytic_vs_fd_rel = report.max_analytic_vs_fd_rel.max(r.analytic_vs_fd);
        let score = (r.analytic_vs_shift / ANALYTIC_VS_SHIFT_TOL)
            .max(r.shift_vs_fd / FD_REL_TOL)
            .max(r.analytic_vs_fd / FD_REL_TOL);
        if score > worst_score {
            worst_score = score;
            report.worst = Some(r.case);
        }
    }
    report.passed = cfg.trials > 0
        && report.max_analytic_vs_shift <= ANALYTIC_VS_SHIFT_TOL
        && report.max_shift_vs_fd_rel <= FD_REL_TOL
        && report.max_analytic_vs_fd_rel <= FD_REL_TOL;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub cases: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Every non-identity `k` × every `i` × `angles` random angles × {I, H} pre-gates.
pub fn bracket_sweep(angles: usize, seed: u64) -> Result<BracketReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    let mut max_deviation = 0.0f64;
    for k in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
        for i in PauliAxis::ALL {
            for _ in 0..angles {
                let angle = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
                for pre in [PreGate::Identity, PreGate::Hadamard] {
                    max_deviation = max_deviation.max(lie_bracket_check(k, i, angle, pre)?);
                    cases += 1;
                }
            }
        }
    }
    Ok(BracketReport { cases, max_deviation, passed: max_deviation <= BRACKET_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_shift_constant_fails() {
        let cfg = TriangleConfig {
            trials: 4,
            rule: ShiftRule { scale: 0.55, ..ShiftRule::default() },
            ..TriangleConfig::default()
        };
        let report = oracle_triangle(&cfg).unwrap();
        assert!(!report.passed);
        assert!(report.worst.is_some());
    }

    #[test]
    fn zero_trials_never_pass() {
        let cfg = TriangleConfig { trials: 0, ..TriangleConfig::default() };
        assert!(!oracle_triangle(&cfg).unwrap().passed);
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((relative_error(1e-9, 0.0) - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn central_differences_of_a_polynomial() {
        let f = |x: &[f64]| vec![x[0] * x[0] * x[1], x[1].sin()];
        let j = central_differences(f, &[1.5, 0.3], FD_STEP);
        assert!((j[0][0] - 2.0 * 1.5 * 0.3).abs() < 1e-9);
        assert!((j[0][1] - 1.5 * 1.5).abs() < 1e-9);
        assert!(j[1][0].abs() < 1e-12);
        assert!((j[1][1] - 0.3f64.cos()).abs() < 1e-9);
    }
}
