//! Acceptance harness. The criteria live in `quasiconv::verify`; the
//! `acceptance` test target runs each one and prints its result line.

use quasiconv::verify::{run_criterion, Criterion};

/// Run one criterion, print its line and return it.
pub fn report(id: &str) -> Criterion {
    let c = run_criterion(id).expect("known criterion");
    println!("{c}");
    c
}
