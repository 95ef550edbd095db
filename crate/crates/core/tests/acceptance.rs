//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances live with each check in
//! `casimir_core::verify` and are echoed in the detail text.

use std::process::ExitCode;

use casimir_core::verify::run_suite;

fn main() -> ExitCode {
    let results = run_suite();
    for r in &results {
        println!(
            "[{}] {} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.detail
        );
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed} of {} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
