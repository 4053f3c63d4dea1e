//! Acceptance gate: one PASS/FAIL line per criterion, every suite run with
//! its default parameters and seed 0. Runs without the libtest harness so
//! the lines are never captured; a failing criterion exits nonzero.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ecslab::verify::{run_suite, ResidualReport, Suite, SuiteOptions, SuiteParams, SuiteReport};

const SUITE_BUDGET: Duration = Duration::from_secs(60);

struct Gate {
    checks: BTreeMap<String, ResidualReport>,
    timings: Vec<(Suite, Duration)>,
}

impl Gate {
    fn run() -> Self {
        let mut checks = BTreeMap::new();
        let mut timings = Vec::new();
        for suite in Suite::EACH {
            let start = Instant::now();
            let report: SuiteReport = run_suite(suite, &SuiteParams::default(), &SuiteOptions::default())
                .unwrap_or_else(|e| panic!("suite {suite} errored: {e}"));
            timings.push((suite, start.elapsed()));
            for c in report.checks {
                checks.insert(c.id.clone(), c);
            }
        }
        Self { checks, timings }
    }

    fn check(&self, id: &str) -> &ResidualReport {
        self.checks.get(id).unwrap_or_else(|| panic!("missing check {id}"))
    }

    /// Passing, with at least `min_samples` rows and a tolerance no looser
    /// than `max_tol`. Returns a short reason on failure.
    fn demand(&self, id: &str, min_samples: usize, max_tol: f64) -> Result<(), String> {
        let c = self.check(id);
        if c.samples.len() < min_samples {
            return Err(format!("{id}: {} samples < {min_samples}", c.samples.len()));
        }
        if c.tolerance > max_tol {
            return Err(format!("{id}: tolerance {:e} looser than {max_tol:e}", c.tolerance));
        }
        if !c.pass {
            return Err(format!("{id}: max {:e} >= tol {:e}", c.max_rel_residual, c.tolerance));
        }
        Ok(())
    }
}

fn all(results: impl IntoIterator<Item = Result<(), String>>) -> Result<(), String> {
    let errs: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs.join("; "))
    }
}

/// Source of the FD backend with comments stripped.
fn fd_backend_code() -> String {
    include_str!("../src/operators/fd.rs")
        .lines()
        .map(|l| l.split("//").next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() {
    let gate = Gate::run();
    let mut results: Vec<(&str, Result<(), String>)> = Vec::new();

    results.push((
        "1 appendix identities",
        all([
            gate.demand("appendix.derivative", 200, 1e-9),
            gate.demand("appendix.square", 200, 1e-9),
            gate.demand("appendix.three_point", 200, 1e-9),
            // Integer ulp distance strictly below 3, i.e. at most 2 ulp.
            gate.demand("appendix.parity", 200, 3.0),
        ]),
    ));

    results.push(("2 trigonometric limit", gate.demand("appendix.trigonometric_limit", 50, 3.0)));

    results.push((
        "3 many-body source identity",
        all([
            gate.demand("prop1.analytic", 50, 1e-9),
            gate.demand("prop1.fd", 50, 1e-6),
            gate.demand("prop1.constant_forms", 1, 1e-13),
        ]),
    ));

    let balanced_zero = {
        let c = gate.check("cor1.balanced");
        // The suite records an infinite residual whenever the coefficient is nonzero.
        if c.samples.iter().all(|s| s.rel_residual.is_finite()) {
            Ok(())
        } else {
            Err("cor1.balanced: beta coefficient not exactly zero".to_string())
        }
    };
    results.push((
        "4 deformed kernel identity",
        all([
            gate.demand("cor1.analytic", 30, 1e-9),
            gate.demand("cor1.fd", 30, 1e-6),
            gate.demand("cor1.balanced", 1, 1e-9),
            balanced_zero,
            gate.demand("cor1.embedding_constant", 30, 1e-13),
        ]),
    ));

    results.push((
        "5 closed-form constants",
        all([
            gate.demand("shift.remark2_e0", 20, 1e-13),
            gate.demand("shift.remark2_c", 20, 1e-13),
            gate.demand("shift.general", 20, 1e-13),
            gate.demand("shift.standard_e0", 20, 1e-13),
            gate.demand("shift.standard_c", 20, 1e-13),
            gate.demand("lemma1.constant_shift", 20, 1e-13),
        ]),
    ));

    results.push((
        "6 ground states",
        all([
            gate.demand("cor2.analytic", 4 * 2 * 10, 1e-9),
            gate.demand("cor2.eigenvalue", 8, 1e-13),
        ]),
    ));

    results.push((
        "7 Laurent eigenstates",
        all([
            gate.demand("cor3.fd", 6 * 5, 1e-5),
            // One row per configuration, covering every label.
            gate.demand("cor3.quadrature_nodes", 5, 1e-10),
            gate.demand("cor3.quadrature_radii", 5, 1e-9),
            gate.demand("cor3.trigonometric_coefficients", 3, 1e-12),
        ]),
    ));

    let code = fd_backend_code();
    let shared: Vec<&str> = ["phi(", "log_grad", "log_derivatives", "log_beta_deriv", ".f(", "potential_derivative"]
        .into_iter()
        .filter(|needle| code.contains(needle))
        .collect();
    let isolation = if shared.is_empty() {
        Ok(())
    } else {
        Err(format!("FD backend references {shared:?}"))
    };
    results.push((
        "8 backend independence",
        all([
            isolation,
            gate.demand("prop1.backend_agreement", 50, 1.0),
            gate.demand("cor1.backend_agreement", 30, 1.0),
            gate.demand("cor2.fd", 80, 1e-6),
            gate.demand("lemma1.fd", 1, 1e-6),
        ]),
    ));

    let slow: Vec<String> = gate
        .timings
        .iter()
        .filter(|(_, d)| *d > SUITE_BUDGET)
        .map(|(s, d)| format!("{s} took {d:?}"))
        .collect();
    results.push(("runtime budget", if slow.is_empty() { Ok(()) } else { Err(slow.join("; ")) }));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(()) => println!("PASS {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    for (s, d) in &gate.timings {
        println!("     {s}: {:.2} s", d.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
