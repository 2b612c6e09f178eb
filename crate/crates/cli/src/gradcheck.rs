use clap::Args;
use serde_json::json;

use qgradcam::gradcheck::{self, TriangleConfig};
use qgradcam::parallel::Execution;
use qgradcam::vqc::{ShiftRule, ANALYTIC_MAX_QUBITS};

use crate::error::{usage, CliError};

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Random angles per (k, i, pre-gate) case in the bracket sweep
    #[arg(long, default_value_t = 20)]
    angles: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Replace the shift-rule scale (negative control)
    #[arg(long, hide = true)]
    corrupt_shift_scale: Option<f64>,
}

pub fn run(a: GradcheckArgs) -> Result<(), CliError> {
    if a.trials == 0 {
        return Err(usage("--trials", "0 trials checks nothing"));
    }
    if a.qubits == 0 || a.qubits > ANALYTIC_MAX_QUBITS {
        return Err(usage("--qubits", format!("must be in 1..={ANALYTIC_MAX_QUBITS}")));
    }
    let rule = match a.corrupt_shift_scale {
        Some(scale) => ShiftRule { scale, ..ShiftRule::default() },
        None => ShiftRule::default(),
    };
    let cfg = TriangleConfig {
        qubits: vec![a.qubits],
        blocks: vec![a.blocks],
        trials: a.trials,
        seed: a.seed,
        rule,
        execution: Execution::Parallel,
    };
    let triangle = gradcheck::oracle_triangle(&cfg)?;
    let bracket = gradcheck::bracket_sweep(a.angles, a.seed)?;
    println!(
        "{}",
        json!({
            "event": "gradcheck",
            "qubits": a.qubits,
            "blocks": a.blocks,
            "trials": triangle.trials,
            "max_analytic_vs_shift": triangle.max_analytic_vs_shift,
            "max_shift_vs_fd_rel": triangle.max_shift_vs_fd_rel,
            "max_analytic_vs_fd_rel": triangle.max_analytic_vs_fd_rel,
            "bracket_cases": bracket.cases,
            "bracket_max_deviation": bracket.max_deviation,
            "passed": triangle.passed && bracket.passed,
        })
    );
    eprintln!(
        "analytic vs shift {:.3e} (tol {:.0e}), shift vs FD {:.3e}, analytic vs FD {:.3e} (tol {:.0e}), bracket {:.3e} (tol {:.0e})",
        triangle.max_analytic_vs_shift,
        gradcheck::ANALYTIC_VS_SHIFT_TOL,
        triangle.max_shift_vs_fd_rel,
        triangle.max_analytic_vs_fd_rel,
        gradcheck::FD_REL_TOL,
        bracket.max_deviation,
        gradcheck::BRACKET_TOL,
    );
    if triangle.passed && bracket.passed {
        return Ok(());
    }
    if let Some(w) = &triangle.worst {
        println!("{}", json!({ "event": "worst_case", "case": w }));
    }
    Err(CliError::Verification("gradient check exceeded tolerance".into()))
}
