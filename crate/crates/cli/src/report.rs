//! Output renderers: solver-run JSON, sweep CSV/JSON, and curve CSV.

use std::fmt::Write as _;

use fracprox_core::bench::SweepReport;
use fracprox_core::SolverRun;

/// Serializes a run to JSON with the documented schema: `final_iterate`,
/// `objective_trace`, `step_trace`, `param_trace`, `stop_reason`,
/// `iterations`.
pub fn run_to_json(run: &SolverRun) -> String {
    serde_json::to_string(run).expect("solver run serializes")
}

/// CSV rendering of a sweep: header `solver,r,success_rate,trials`, one row
/// per (solver, sparsity) cell, rates with six decimals.
pub fn sweep_to_csv(report: &SweepReport) -> String {
    let mut out = String::from("solver,r,success_rate,trials\n");
    for curve in &report.per_solver {
        for (&r, &rate) in report.grid.iter().zip(&curve.success_rates) {
            let _ = writeln!(out, "{},{},{:.6},{}", curve.solver, r, rate, report.trials);
        }
    }
    out
}

/// JSON rendering of a sweep, including its `config_digest`.
pub fn sweep_to_json(report: &SweepReport) -> String {
    serde_json::to_string_pretty(report).expect("sweep report serializes")
}

/// Two-column CSV for curve data.
pub fn curve_to_csv(header: (&str, &str), points: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in points {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracprox_core::bench::{sweep_success_rate, SolverSpec, SweepConfig};

    #[test]
    fn run_json_has_exactly_the_documented_fields() {
        let p = fracprox_core::ProblemInstance::from_rows(&[vec![1.0, 0.0]], &[1.0]).unwrap();
        let run = fracprox_core::solvers::run_ista_soft(
            &p,
            &[0.0, 0.0],
            0.4,
            0.99,
            &fracprox_core::StoppingRule::experiment_default(),
        )
        .unwrap();
        let json = run_to_json(&run);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let obj = value.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            vec![
                "final_iterate",
                "iterations",
                "objective_trace",
                "param_trace",
                "step_trace",
                "stop_reason",
            ]
        );
        assert_eq!(obj["stop_reason"], "Converged");
        assert!(obj["param_trace"][0].as_array().unwrap().len() == 2);
    }

    #[test]
    fn sweep_csv_shape_and_determinism() {
        let cfg = SweepConfig::new(
            8,
            16,
            1.0,
            vec![1, 2],
            2,
            3,
            vec![SolverSpec::cifpta_s2_defaults(), SolverSpec::ista_defaults()],
        )
        .unwrap();
        let a = sweep_to_csv(&sweep_success_rate(&cfg).unwrap());
        let b = sweep_to_csv(&sweep_success_rate(&cfg).unwrap());
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 2);
        assert_eq!(lines[0], "solver,r,success_rate,trials");
        assert!(lines[1].starts_with("CIFPTA-S2,1,"));
        assert!(lines[1].ends_with(",2"));
    }

    #[test]
    fn sweep_json_contains_the_digest() {
        let cfg = SweepConfig::new(
            8,
            16,
            1.0,
            vec![1],
            1,
            3,
            vec![SolverSpec::ista_defaults()],
        )
        .unwrap();
        let json = sweep_to_json(&sweep_success_rate(&cfg).unwrap());
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["config_digest"]["m"], 8);
        assert_eq!(value["config_digest"]["base_seed"], 3);
        assert!(value["config_digest"]["mu_policy"].is_string());
    }

    #[test]
    fn curve_csv_format() {
        let csv = curve_to_csv(("beta", "f"), &[(0.0, 1.0), (0.5, 2.25)]);
        assert_eq!(csv, "beta,f\n0,1\n0.5,2.25\n");
    }
}
