//! Acceptance suite: one line per criterion and a summary line.
//!
//! Failing criteria are reported as FAIL; the process exit status reflects
//! them only when `ALUTHGE_ACCEPTANCE_STRICT` is set.

use std::process::ExitCode;
use std::time::Instant;

use aluthge_core::verify::{self, CheckReport, ACCEPTANCE_CONVERGENCE};
use aluthge_core::Result;

const SEED: u64 = 20_240_601;

struct Criterion {
    number: u32,
    title: &'static str,
    budget_secs: f64,
    run: fn() -> Result<Vec<CheckReport>>,
}

fn one(r: Result<CheckReport>) -> Result<Vec<CheckReport>> {
    r.map(|r| vec![r])
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        number: 1,
        title: "closed-form agreement, 100 mixed 6x6, tol 1e-9 |T|_F",
        budget_secs: 10.0,
        run: || one(verify::closed_form_agreement(SEED, 100, 6, 1e-9)),
    },
    Criterion {
        number: 2,
        title: "quadrature oracle, 20 invertible 4x4, tol 1e-5 |T|",
        budget_secs: 30.0,
        run: || one(verify::quadrature_agreement(SEED, 20, 4, 1e-5)),
    },
    Criterion {
        number: 3,
        title: "structural properties on the full corpus, every built-in mean, tol 1e-9 |T|",
        budget_secs: f64::INFINITY,
        run: || verify::structural_properties(SEED, 4, &[3, 4, 5, 6], 1e-9),
    },
    Criterion {
        number: 4,
        title: "fixed point iff normal, 50 normal / 50 non-normal, tols 1e-8 / 1e-6",
        budget_secs: f64::INFINITY,
        run: || one(verify::fixed_points(SEED, 50, 5, 1e-8, 1e-6)),
    },
    Criterion {
        number: 5,
        title: "arithmetic iteration convergence, 50 phase-filtered 5x5, 2000 steps, tol 1e-10",
        budget_secs: 120.0,
        run: || one(verify::arithmetic_convergence(SEED, ACCEPTANCE_CONVERGENCE)),
    },
    Criterion {
        number: 6,
        title: "binomial closed form, n <= 10, 20 invertible, tol 1e-8 |T|",
        budget_secs: f64::INFINITY,
        run: || one(verify::binomial_closed_form(SEED, 20, 4, 10, 1e-8)),
    },
    Criterion {
        number: 7,
        title: "shift non-convergence, a=1 b=2 lambda=1/2 K=6, rel tol 1e-12",
        budget_secs: 10.0,
        run: || one(verify::shift_nonconvergence(1.0, 2.0, 0.5, 6, 1e-12)),
    },
    Criterion {
        number: 8,
        title: "numerical-range nesting, 50 matrices 3..8, 720 angles, tol 1e-7 |T|",
        budget_secs: 120.0,
        run: || one(verify::range_nesting(SEED, 50, (3, 8), 720, 1e-7)),
    },
    Criterion {
        number: 9,
        title: "dominance chain, 100 tuples of length <= 6, tol 1e-10, refutation below -1e-6",
        budget_secs: f64::INFINITY,
        run: || one(verify::dominance_chain_check(SEED, 100, 6, 1e-10, -1e-6)),
    },
];

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let (passed, notes) = match outcome {
            Ok(reports) => {
                let passed = reports.iter().all(|r| r.passed) && secs < c.budget_secs;
                let notes: Vec<String> = reports
                    .iter()
                    .map(|r| {
                        format!(
                            "[{} {}/{} ok, worst {:.3e}] {}",
                            r.tag,
                            r.cases - r.failures,
                            r.cases,
                            r.worst,
                            r.detail
                        )
                    })
                    .collect();
                (passed, notes.join(" "))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = if c.budget_secs.is_finite() {
            format!(" (budget {:.0}s)", c.budget_secs)
        } else {
            String::new()
        };
        println!(
            "criterion {}: {} | {} | {:.2}s{} | {}",
            c.number,
            if passed { "PASS" } else { "FAIL" },
            c.title,
            secs,
            budget,
            notes
        );
        if !passed {
            failed.push(c.number);
        }
    }
    let passed = CRITERIA.len() - failed.len();
    println!(
        "acceptance: {passed}/{} criteria passed{}",
        CRITERIA.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(", failing: {failed:?}")
        }
    );
    if failed.is_empty() || std::env::var_os("ALUTHGE_ACCEPTANCE_STRICT").is_none() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
